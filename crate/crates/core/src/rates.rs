//! Convergence exponents of the standard and local k-NN regressors, and the
//! standard estimator's neighbour-count schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateSetting {
    /// Source rate of the one-sample standard k-NN.
    StandardOneSample,
    /// Target rate of the two-sample standard k-NN.
    StandardTwoSampleTarget,
    /// Source rate of the one-sample local k-NN.
    LocalOneSample,
    /// Target rate of the two-sample local k-NN.
    LocalTwoSampleTarget,
}

impl RateSetting {
    pub const ALL: [RateSetting; 4] = [
        RateSetting::StandardOneSample,
        RateSetting::StandardTwoSampleTarget,
        RateSetting::LocalOneSample,
        RateSetting::LocalTwoSampleTarget,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RateSetting::StandardOneSample => "standard one-sample (source)",
            RateSetting::StandardTwoSampleTarget => "standard two-sample (target)",
            RateSetting::LocalOneSample => "local one-sample (source)",
            RateSetting::LocalTwoSampleTarget => "local two-sample (target)",
        }
    }
}

/// Which side of the minimum binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// The distributional exponent (γ for source rates, ρ for target rates)
    /// is the smaller term.
    SourceLimited,
    /// The rate saturates at the smoothness exponent `2β/(2β+d)`.
    SmoothnessLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalRate {
    pub rate: f64,
    pub regime: Regime,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(Error::invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// `2β/(2β+d)`, the minimax exponent for β-Hölder regression in ℝ^d.
pub fn smoothness_exponent(beta: f64, d: usize) -> f64 {
    2.0 * beta / (2.0 * beta + d as f64)
}

fn min_with_regime(distributional: f64, smooth: f64) -> TheoreticalRate {
    if distributional < smooth {
        TheoreticalRate {
            rate: distributional,
            regime: Regime::SourceLimited,
        }
    } else {
        TheoreticalRate {
            rate: smooth,
            regime: Regime::SmoothnessLimited,
        }
    }
}

pub fn theoretical_rate(
    setting: RateSetting,
    beta: f64,
    d: usize,
    gamma: f64,
    rho: f64,
) -> Result<TheoreticalRate> {
    positive("beta", beta)?;
    positive("gamma", gamma)?;
    positive("rho", rho)?;
    if d == 0 {
        return Err(Error::invalid("d", "must be positive"));
    }
    let r0 = smoothness_exponent(beta, d);
    let df = d as f64;
    // γ = ∞ and ρ = ∞ are allowed and saturate at r0
    let distributional = match setting {
        RateSetting::StandardOneSample => {
            if gamma.is_infinite() {
                1.0
            } else {
                gamma / (gamma + 1.0)
            }
        }
        RateSetting::StandardTwoSampleTarget => {
            if rho.is_infinite() {
                0.5
            } else {
                rho / (2.0 * rho + df)
            }
        }
        RateSetting::LocalOneSample => gamma,
        RateSetting::LocalTwoSampleTarget => {
            if rho.is_infinite() {
                1.0
            } else {
                rho / (rho + df)
            }
        }
    };
    Ok(min_with_regime(distributional, r0))
}

/// Source exponent of the standard schedule: `γ/(γ+1) ∧ 2β/(2β+d)`.
pub fn standard_source_exponent(beta: f64, d: usize, gamma: f64) -> Result<f64> {
    theoretical_rate(RateSetting::StandardOneSample, beta, d, gamma, 1.0).map(|r| r.rate)
}

/// `min(n, max(1, ⌈κ · ln(A)^{1−r} · n^r⌉))` for a given exponent `r`.
pub fn standard_k(n: usize, aux_log: usize, exponent: f64, kappa: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    positive("kappa", kappa)?;
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::invalid(
            "exponent",
            format!("must lie in (0, 1], got {exponent}"),
        ));
    }
    let raw = kappa * (aux_log as f64).ln().powf(1.0 - exponent) * (n as f64).powf(exponent);
    let k = raw.ceil();
    let k = if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    };
    Ok(k.clamp(1, n))
}

/// Neighbour count of the standard k-NN: `r_T = γ/(γ+1) ∧ 2β/(2β+d)` and
/// `k = min(n, max(1, ⌈κ ln(A)^{1−r_T} n^{r_T}⌉))`, with `A = n` for one
/// sample and `A = n + m` for two.
pub fn standard_k_schedule(
    n: usize,
    aux_log: usize,
    beta: f64,
    d: usize,
    gamma: f64,
    kappa: f64,
) -> Result<usize> {
    if n < 2 {
        return Err(Error::invalid("n", format!("must be at least 2, got {n}")));
    }
    let r = standard_source_exponent(beta, d, gamma)?;
    standard_k(n, aux_log, r, kappa)
}

/// Target-sample count of the two-sample standard k-NN, exponent
/// `ρ/(2ρ+d) ∧ 2β/(2β+d)`.
pub fn standard_target_k_schedule(
    m: usize,
    aux_log: usize,
    beta: f64,
    d: usize,
    rho: f64,
    kappa: f64,
) -> Result<usize> {
    if m < 2 {
        return Err(Error::invalid("m", format!("must be at least 2, got {m}")));
    }
    let r = theoretical_rate(RateSetting::StandardTwoSampleTarget, beta, d, 1.0, rho)?.rate;
    standard_k(m, aux_log, r, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_exponent_examples() {
        assert_relative_eq!(standard_source_exponent(1.0, 1, 2.0).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(standard_source_exponent(1.0, 1, 1e9).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(standard_source_exponent(1.0, 1, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn standard_schedule_4096() {
        // sqrt(ln 4096) * 64 = 184.579...
        assert_eq!(
            standard_k_schedule(4096, 4096, 1.0, 1, 1.0, 1.0).unwrap(),
            185
        );
    }

    #[test]
    fn standard_schedule_errors() {
        assert!(standard_k_schedule(4096, 4096, 1.0, 1, 0.0, 1.0).is_err());
        assert!(standard_k_schedule(4096, 4096, -1.0, 1, 1.0, 1.0).is_err());
        assert!(standard_k_schedule(4096, 4096, 1.0, 1, 1.0, 0.0).is_err());
        assert!(standard_k_schedule(1, 1, 1.0, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn schedule_is_clamped() {
        assert_eq!(standard_k(10, 10, 1.0, 1e6).unwrap(), 10);
        assert_eq!(standard_k(10, 1, 0.5, 1e-9).unwrap(), 1);
    }

    #[test]
    fn rate_examples() {
        let local = theoretical_rate(RateSetting::LocalOneSample, 1.0, 1, 1.0, 4.0).unwrap();
        assert_relative_eq!(local.rate, 2.0 / 3.0);
        assert_eq!(local.regime, Regime::SmoothnessLimited);
        let std = theoretical_rate(RateSetting::StandardOneSample, 1.0, 1, 1.0, 4.0).unwrap();
        assert_relative_eq!(std.rate, 0.5);
        assert_eq!(std.regime, Regime::SourceLimited);

        // Pareto pair α_P = 1, α_Q = 3: γ = 3/2, ρ = 3
        let gamma = 3.0 / 2.0;
        let rt = theoretical_rate(RateSetting::LocalOneSample, 1.0, 1, gamma, 3.0).unwrap();
        assert_relative_eq!(rt.rate, 2.0 / 3.0);
        let rm = theoretical_rate(RateSetting::LocalTwoSampleTarget, 1.0, 1, gamma, 3.0).unwrap();
        assert_relative_eq!(rm.rate, 2.0 / 3.0);
        let std_t =
            theoretical_rate(RateSetting::StandardTwoSampleTarget, 1.0, 1, gamma, 3.0).unwrap();
        assert_relative_eq!(std_t.rate, 3.0 / 7.0);
    }

    #[test]
    fn rejects_nonpositive() {
        for s in RateSetting::ALL {
            assert!(theoretical_rate(s, 0.0, 1, 1.0, 1.0).is_err());
            assert!(theoretical_rate(s, 1.0, 0, 1.0, 1.0).is_err());
            assert!(theoretical_rate(s, 1.0, 1, -1.0, 1.0).is_err());
            assert!(theoretical_rate(s, 1.0, 1, 1.0, f64::NAN).is_err());
        }
    }
}
