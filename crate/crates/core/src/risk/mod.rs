//! Regression tasks, Monte Carlo excess risk and empirical rate fitting.

mod experiment;
mod fit;

pub use experiment::{
    run_paired_experiment, run_rate_experiment, write_risk_csv, EstimatorConfig, EstimatorKind,
    ReplicateRisk, RiskCurve, RiskPoint, SampleGrid, Sampling, TestDesign, CSV_HEADER,
};
pub use fit::{fit_log_slope, fit_rate, LogArgument, LogSlope, RateReport};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::{LabeledDataset, Regressor};
use crate::neighbors::PointCloud;
use crate::rng::RngStream;

/// Regression function with certified Hölder constants `(β, F, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetFunction {
    /// `F · sin(s x_1)`; β = 1, L = F·s.
    Sine { amplitude: f64, frequency: f64 },
    /// `min(F, L ‖x − c·1‖^β)` with β ∈ (0, 1].
    Cusp {
        height: f64,
        lipschitz: f64,
        beta: f64,
        center: f64,
    },
    /// `f ≡ c`.
    Constant { value: f64 },
}

impl TargetFunction {
    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        TargetFunction::Sine {
            amplitude,
            frequency,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TargetFunction::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * x[0]).sin(),
            TargetFunction::Cusp {
                height,
                lipschitz,
                beta,
                center,
            } => {
                let r = x
                    .iter()
                    .map(|&v| (v - center) * (v - center))
                    .sum::<f64>()
                    .sqrt();
                height.min(lipschitz * r.powf(beta))
            }
            TargetFunction::Constant { value } => value,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            TargetFunction::Cusp { beta, .. } => beta,
            _ => 1.0,
        }
    }

    /// Sup-norm bound `F`.
    pub fn bound(&self) -> f64 {
        match *self {
            TargetFunction::Sine { amplitude, .. } => amplitude.abs(),
            TargetFunction::Cusp { height, .. } => height,
            TargetFunction::Constant { value } => value.abs(),
        }
    }

    /// Hölder constant `L`.
    pub fn holder_constant(&self) -> f64 {
        match *self {
            TargetFunction::Sine {
                amplitude,
                frequency,
            } => (amplitude * frequency).abs(),
            TargetFunction::Cusp { lipschitz, .. } => lipschitz,
            TargetFunction::Constant { .. } => 0.0,
        }
    }

    fn validate_params(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite"))
            }
        };
        match *self {
            TargetFunction::Sine {
                amplitude,
                frequency,
            } => {
                finite("amplitude", amplitude)?;
                finite("frequency", frequency)
            }
            TargetFunction::Cusp {
                height,
                lipschitz,
                beta,
                center,
            } => {
                finite("center", center)?;
                if !(height > 0.0 && height.is_finite()) {
                    return Err(Error::invalid("height", "must be positive and finite"));
                }
                if !(lipschitz > 0.0 && lipschitz.is_finite()) {
                    return Err(Error::invalid("lipschitz", "must be positive and finite"));
                }
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(Error::invalid(
                        "beta",
                        format!("must lie in (0, 1], got {beta}"),
                    ));
                }
                Ok(())
            }
            TargetFunction::Constant { value } => finite("value", value),
        }
    }

    /// Checks `|f| ≤ F` on a grid and `|f(x) − f(y)| ≤ L‖x − y‖^β` on
    /// sampled pairs from the box `[lo, hi]^dim`.
    pub fn certify(&self, dim: usize, lo: f64, hi: f64) -> Result<()> {
        self.validate_params()?;
        let (f_bound, l, beta) = (self.bound(), self.holder_constant(), self.beta());
        let slack = |v: f64| v * (1.0 + 1e-12) + 1e-12;
        let grid = 4001;
        for i in 0..grid {
            let t = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
            let v = self.eval(&vec![t; dim]);
            if v.abs() > slack(f_bound) {
                return Err(Error::invalid(
                    "function",
                    format!("|f({t})| = {} exceeds the bound {f_bound}", v.abs()),
                ));
            }
        }
        let mut rng = RngStream::from_seed(0x5eed);
        let width = hi - lo;
        for i in 0..4000 {
            let x: Vec<f64> = (0..dim).map(|_| lo + width * rng.random::<f64>()).collect();
            // alternate far pairs and pairs at small scales
            let h = if i % 2 == 0 {
                width
            } else {
                width * 10f64.powi(-(i % 9))
            };
            let y: Vec<f64> = x
                .iter()
                .map(|&v| v + h * (rng.random::<f64>() - 0.5))
                .collect();
            let dist = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let diff = (self.eval(&x) - self.eval(&y)).abs();
            if diff > slack(l * dist.powf(beta)) {
                return Err(Error::invalid(
                    "function",
                    format!(
                        "Hölder bound fails between {x:?} and {y:?}: {diff} > {}",
                        l * dist.powf(beta)
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Centered label noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseSpec {
    Gaussian {
        sigma: f64,
    },
    /// Density `exp(−|ε|/b) / (2b)`.
    Laplace {
        scale: f64,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::Laplace { scale } => scale,
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::invalid(
                "noise",
                format!("scale must be finite and nonnegative, got {v}"),
            ));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => sigma * sigma,
            NoiseSpec::Laplace { scale } => 2.0 * scale * scale,
        }
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
                sigma * z
            }
            NoiseSpec::Laplace { scale } => {
                let e = -(1.0 - rng.random::<f64>()).ln();
                if rng.random::<bool>() {
                    scale * e
                } else {
                    -scale * e
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Source,
    Target,
}

/// `Y = f(X) + ε` with `X ~ P` (source) or `X ~ Q` (target); both share
/// `f` and the noise law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionTask {
    pub source: DistributionSpec,
    pub target: DistributionSpec,
    pub function: TargetFunction,
    pub noise: NoiseSpec,
}

impl RegressionTask {
    pub fn new(
        source: DistributionSpec,
        target: DistributionSpec,
        function: TargetFunction,
        noise: NoiseSpec,
    ) -> Result<Self> {
        let task = Self {
            source,
            target,
            function,
            noise,
        };
        task.validate()?;
        Ok(task)
    }

    /// Same design for source and target.
    pub fn transferless(
        design: DistributionSpec,
        function: TargetFunction,
        noise: NoiseSpec,
    ) -> Result<Self> {
        Self::new(design, design, function, noise)
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.target.validate()?;
        self.noise.validate()?;
        if self.source.dim() != self.target.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: self.target.dim(),
            });
        }
        let (lo, hi) = self.certification_box();
        self.function.certify(self.dim(), lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn beta(&self) -> f64 {
        self.function.beta()
    }

    pub fn design(&self, which: Population) -> &DistributionSpec {
        match which {
            Population::Source => &self.source,
            Population::Target => &self.target,
        }
    }

    // Union of both supports, truncated to 50 scales around the bulk.
    fn certification_box(&self) -> (f64, f64) {
        let span = |d: &DistributionSpec| {
            let (lo, hi) = d.support();
            let w = 50.0 * d.scale();
            (lo.max(d.anchor() - w), hi.min(d.anchor() + w))
        };
        let (a, b) = span(&self.source);
        let (c, d) = span(&self.target);
        (a.min(c), b.max(d))
    }
}

/// Draws `n` labelled points from the source or target design.
///
/// The stream is split into a covariate stream and a noise stream, so the
/// same stream yields the same noise sequence for either population.
pub fn generate_labeled(
    task: &RegressionTask,
    which: Population,
    n: usize,
    rng: &mut RngStream,
) -> Result<LabeledDataset<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut cov = rng.split();
    let mut noise = rng.split();
    let cloud = task.design(which).sample(n, &mut cov)?;
    let labels = cloud
        .iter()
        .map(|x| task.function.eval(x) + task.noise.draw(&mut noise))
        .collect();
    LabeledDataset::new(cloud, labels)
}

/// Anything that predicts at a batch of points.
pub trait Predictor {
    fn predict_points(&self, points: &PointCloud<f64>) -> Result<Vec<f64>>;
}

impl Predictor for Regressor<f64> {
    fn predict_points(&self, points: &PointCloud<f64>) -> Result<Vec<f64>> {
        self.predict_many(points)
    }
}

/// Adapts a plain function into a [`Predictor`].
pub struct FnPredictor<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Predictor for FnPredictor<F> {
    fn predict_points(&self, points: &PointCloud<f64>) -> Result<Vec<f64>> {
        Ok(points.iter().map(|x| (self.0)(x)).collect())
    }
}

/// `(1/T) Σ_t (f̂(Z_t) − f(Z_t))²` over the given test points.
pub fn excess_risk_on<P: Predictor + ?Sized>(
    predictor: &P,
    task: &RegressionTask,
    points: &PointCloud<f64>,
) -> Result<f64> {
    let preds = predictor.predict_points(points)?;
    let total: f64 = points
        .iter()
        .zip(&preds)
        .map(|(z, &p)| {
            let e = p - task.function.eval(z);
            e * e
        })
        .sum();
    Ok(total / points.len() as f64)
}

/// Excess risk on `test_count` fresh draws from the target design.
pub fn excess_risk_mc<P: Predictor + ?Sized>(
    predictor: &P,
    task: &RegressionTask,
    test_count: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if test_count == 0 {
        return Err(Error::invalid("test_count", "must be at least 1"));
    }
    let points = task.target.sample(test_count, rng)?;
    excess_risk_on(predictor, task, &points)
}
