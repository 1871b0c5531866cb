//! Analytic design distributions and diagnostics for the assumptions that
//! drive transfer rates: density ratio exponent, minimal/maximal mass
//! properties and the pseudo-moment condition.

mod diagnostics;
pub mod quadrature;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Pareto};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::neighbors::PointCloud;
use crate::rng::RngStream;

pub use diagnostics::{
    check_dre_numeric, check_mass_properties, check_pseudo_moment, default_r_grid, default_x_grid,
    dre_threshold, family_mass_constants, pm_threshold, tail_functional, DiagnosticReport,
    MassProperty, MassPropertyConstants, TailFunctional, Verdict, Witness,
};
pub use quadrature::QuadratureBudget;

fn default_dim() -> usize {
    1
}

/// A design distribution. Exponential, Pareto and Gaussian are
/// one-dimensional; the uniform family is the cube `[a, b]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform {
        a: f64,
        b: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Exponential {
        lambda: f64,
    },
    /// Pareto with location 1 and shape α: density `α x^{-(α+1)}` on `x ≥ 1`.
    Pareto {
        alpha: f64,
    },
    Gaussian {
        mu: f64,
        sigma: f64,
    },
}

impl DistributionSpec {
    pub fn uniform(a: f64, b: f64, dim: usize) -> Self {
        DistributionSpec::Uniform { a, b, dim }
    }

    pub fn exponential(lambda: f64) -> Self {
        DistributionSpec::Exponential { lambda }
    }

    pub fn pareto(alpha: f64) -> Self {
        DistributionSpec::Pareto { alpha }
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        DistributionSpec::Gaussian { mu, sigma }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Pareto { .. } => "pareto",
            DistributionSpec::Gaussian { .. } => "gaussian",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        match *self {
            DistributionSpec::Uniform { a, b, dim } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::invalid(
                        "a, b",
                        format!("need finite a < b, got [{a}, {b}]"),
                    ));
                }
                if dim == 0 {
                    return Err(Error::ZeroDimension);
                }
                Ok(())
            }
            DistributionSpec::Exponential { lambda } => pos("lambda", lambda),
            DistributionSpec::Pareto { alpha } => pos("alpha", alpha),
            DistributionSpec::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::invalid("mu", "must be finite"));
                }
                pos("sigma", sigma)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DistributionSpec::Uniform { dim, .. } => dim,
            _ => 1,
        }
    }

    /// Closure of the support of a one-dimensional marginal.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => (a, b),
            DistributionSpec::Exponential { .. } => (0.0, f64::INFINITY),
            DistributionSpec::Pareto { .. } => (1.0, f64::INFINITY),
            DistributionSpec::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Natural length scale, used as the first quadrature segment.
    pub fn scale(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => b - a,
            DistributionSpec::Exponential { lambda } => 1.0 / lambda,
            DistributionSpec::Pareto { .. } => 1.0,
            DistributionSpec::Gaussian { sigma, .. } => sigma,
        }
    }

    /// A point in the bulk of the distribution.
    pub fn anchor(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => 0.5 * (a + b),
            DistributionSpec::Exponential { .. } => 0.0,
            DistributionSpec::Pareto { .. } => 1.0,
            DistributionSpec::Gaussian { mu, .. } => mu,
        }
    }

    /// `sup_x p(x)`.
    pub fn sup_density(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, dim } => (b - a).powi(dim as i32).recip(),
            DistributionSpec::Exponential { lambda } => lambda,
            DistributionSpec::Pareto { alpha } => alpha,
            DistributionSpec::Gaussian { sigma, .. } => {
                1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// Log-density of a one-dimensional marginal (`-∞` off the support).
    pub fn ln_pdf1(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => {
                if x >= a && x <= b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistributionSpec::Exponential { lambda } => {
                if x >= 0.0 {
                    lambda.ln() - lambda * x
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistributionSpec::Pareto { alpha } => {
                if x >= 1.0 {
                    alpha.ln() - (alpha + 1.0) * x.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistributionSpec::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
        }
    }

    pub fn pdf1(&self, x: f64) -> f64 {
        self.ln_pdf1(x).exp()
    }

    /// Density at a point of ℝ^d.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, dim } => {
                if x.len() == dim && x.iter().all(|&c| c >= a && c <= b) {
                    self.sup_density()
                } else {
                    0.0
                }
            }
            _ => {
                if x.len() == 1 {
                    self.pdf1(x[0])
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf1(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            DistributionSpec::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            DistributionSpec::Pareto { alpha } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-alpha * x.ln()).exp_m1()
                }
            }
            DistributionSpec::Gaussian { mu, sigma } => {
                0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2))
            }
        }
    }

    /// Survival function `1 − F(x)`, accurate deep in the right tail.
    pub fn sf1(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { a, b, .. } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            DistributionSpec::Exponential { lambda } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            DistributionSpec::Pareto { alpha } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-alpha)
                }
            }
            DistributionSpec::Gaussian { mu, sigma } => {
                0.5 * erfc((x - mu) / (sigma * std::f64::consts::SQRT_2))
            }
        }
    }

    /// Joint CDF; for the uniform cube the product of coordinate CDFs.
    pub fn cdf(&self, x: &[f64]) -> f64 {
        match *self {
            DistributionSpec::Uniform { .. } => x.iter().map(|&c| self.cdf1(c)).product(),
            _ => x.first().map_or(0.0, |&c| self.cdf1(c)),
        }
    }

    /// Probability of the closed ball `B(x, r)`.
    ///
    /// Exact for the one-dimensional families; the uniform cube is supported
    /// only for `d = 1`.
    pub fn ball_mass(&self, x: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        if self.dim() != 1 {
            return Err(Error::Unsupported(format!(
                "ball mass for {} in dimension {}",
                self.family_name(),
                self.dim()
            )));
        }
        let (lo, hi) = (x - r, x + r);
        let mass = match *self {
            DistributionSpec::Exponential { lambda } => {
                let lo = lo.max(0.0);
                if hi <= lo {
                    0.0
                } else {
                    (-lambda * lo).exp() * -(-lambda * (hi - lo)).exp_m1()
                }
            }
            DistributionSpec::Pareto { alpha } => {
                let lo = lo.max(1.0);
                if hi <= lo {
                    0.0
                } else {
                    lo.powf(-alpha) * -(alpha * (lo / hi).ln()).exp_m1()
                }
            }
            DistributionSpec::Gaussian { mu, .. } => {
                if lo >= mu {
                    self.sf1(lo) - self.sf1(hi)
                } else if hi <= mu {
                    self.cdf1(hi) - self.cdf1(lo)
                } else {
                    1.0 - self.cdf1(lo) - self.sf1(hi)
                }
            }
            DistributionSpec::Uniform { a, b, .. } => (hi.min(b) - lo.max(a)).max(0.0) / (b - a),
        };
        Ok(mass.clamp(0.0, 1.0))
    }

    /// Draws `count` i.i.d. points.
    pub fn sample(&self, count: usize, rng: &mut RngStream) -> Result<PointCloud<f64>> {
        self.validate()?;
        if count == 0 {
            return Err(Error::invalid("count", "must be at least 1"));
        }
        let coords: Vec<f64> = match *self {
            DistributionSpec::Uniform { a, b, dim } => (0..count * dim)
                .map(|_| a + (b - a) * rng.random::<f64>())
                .collect(),
            DistributionSpec::Exponential { lambda } => {
                let d = Exp::new(lambda).map_err(|e| Error::invalid("lambda", e.to_string()))?;
                d.sample_iter(rng).take(count).collect()
            }
            DistributionSpec::Pareto { alpha } => {
                let d =
                    Pareto::new(1.0, alpha).map_err(|e| Error::invalid("alpha", e.to_string()))?;
                d.sample_iter(rng).take(count).collect()
            }
            DistributionSpec::Gaussian { mu, sigma } => {
                let d =
                    Normal::new(mu, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
                d.sample_iter(rng).take(count).collect()
            }
        };
        PointCloud::from_flat(self.dim(), coords)
    }
}
