use serde::{Deserialize, Serialize};

use super::experiment::RiskCurve;
use crate::error::{Error, Result};
use crate::rates::{Regime, TheoreticalRate};

/// Argument `A` of the logarithm in the regressor `ln(n / ln A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogArgument {
    N,
    NPlusM,
}

/// Least-squares line `y = intercept − slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSlope {
    pub slope: f64,
    pub std_err: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares of `ys` on `xs`, reported with the sign flipped so
/// that a decreasing curve has a positive slope.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<LogSlope> {
    let k = xs.len();
    if k != ys.len() {
        return Err(Error::LengthMismatch {
            points: k,
            labels: ys.len(),
        });
    }
    if k < 3 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 3 points, got {k}"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateGrid(
            "non-finite coordinate in the log-log fit".into(),
        ));
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateGrid("all grid points coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - a - b * x;
            e * e
        })
        .sum();
    let std_err = (ssr / (kf - 2.0) / sxx).sqrt();
    Ok(LogSlope {
        slope: -b,
        std_err,
        intercept: a,
        points: k,
    })
}

/// Fits `ln(median risk) ≈ c − r ln(n / ln A)` across the grid.
///
/// Needs at least 3 grid points with at least 5 replicates each.
pub fn fit_rate(curve: &RiskCurve, log_arg: LogArgument) -> Result<LogSlope> {
    if curve.points.len() < 3 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 3 grid points, got {}",
            curve.points.len()
        )));
    }
    let mut xs = Vec::with_capacity(curve.points.len());
    let mut ys = Vec::with_capacity(curve.points.len());
    for p in &curve.points {
        if p.replicates.len() < 5 {
            return Err(Error::DegenerateGrid(format!(
                "need at least 5 replicates per grid point, got {} at n={}",
                p.replicates.len(),
                p.n
            )));
        }
        let a = match log_arg {
            LogArgument::N => p.n,
            LogArgument::NPlusM => p.n + p.m,
        };
        if a < 2 {
            return Err(Error::DegenerateGrid(format!("ln A vanishes at n={}", p.n)));
        }
        let med = p.median_risk();
        if !(med > 0.0) {
            return Err(Error::DegenerateGrid(format!(
                "median risk is zero at n={}",
                p.n
            )));
        }
        xs.push((p.n as f64 / (a as f64).ln()).ln());
        ys.push(med.ln());
    }
    fit_log_slope(&xs, &ys)
}

/// Fitted exponent next to the theoretical one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub fitted_slope: f64,
    pub slope_std_err: f64,
    pub theoretical_rate: f64,
    pub regime: Regime,
    /// Target-sample exponent of two-sample estimators.
    pub target_rate: Option<TheoreticalRate>,
}

impl RateReport {
    pub fn new(fit: &LogSlope, source: TheoreticalRate, target: Option<TheoreticalRate>) -> Self {
        Self {
            fitted_slope: fit.slope,
            slope_std_err: fit.std_err,
            theoretical_rate: source.rate,
            regime: source.regime,
            target_rate: target,
        }
    }
}
