use std::fmt;

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_over, QuadratureBudget, TailOutcome};
use super::DistributionSpec;
use crate::error::{Error, Result};

/// Constants `(a_−, r_−, a_+, r_+)` of the minimal and maximal mass
/// properties `a_− p(x) r^d ≤ P{B(x, r)} ≤ a_+ p(x) r^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPropertyConstants {
    pub a_minus: f64,
    pub r_minus: f64,
    pub a_plus: f64,
    pub r_plus: f64,
}

impl MassPropertyConstants {
    pub fn new(a_minus: f64, r_minus: f64, a_plus: f64, r_plus: f64) -> Result<Self> {
        let c = Self {
            a_minus,
            r_minus,
            a_plus,
            r_plus,
        };
        for (name, v) in [
            ("a_minus", a_minus),
            ("r_minus", r_minus),
            ("a_plus", a_plus),
            ("r_plus", r_plus),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(c)
    }

    /// Constants of the exponential family with λ = 1, used as a neutral
    /// reference for families outside the class.
    pub fn reference() -> Self {
        Self {
            a_minus: (-1.0_f64).exp(),
            r_minus: 1.0,
            a_plus: 2.0 * 1.0_f64.sinh(),
            r_plus: 1.0,
        }
    }
}

/// Mass-property constants established analytically for a family, if any.
///
/// Exponential(λ): `(e^{−λ}, 1, 2 sinh(λ)/λ, 1)`. Pareto(α):
/// `(2, 1/2, (3/2)^{α+1}, 1/2)`. Uniform on `[a, b]`: `(1, b − a, 2, b − a)`.
/// Gaussian designs are not in the class and return `None`.
pub fn family_mass_constants(spec: &DistributionSpec) -> Option<MassPropertyConstants> {
    match *spec {
        DistributionSpec::Exponential { lambda } => Some(MassPropertyConstants {
            a_minus: (-lambda).exp(),
            r_minus: 1.0,
            a_plus: 2.0 * lambda.sinh() / lambda,
            r_plus: 1.0,
        }),
        DistributionSpec::Pareto { alpha } => Some(MassPropertyConstants {
            a_minus: 2.0,
            r_minus: 0.5,
            a_plus: 1.5_f64.powf(alpha + 1.0),
            r_plus: 0.5,
        }),
        DistributionSpec::Uniform { a, b, dim: 1 } => Some(MassPropertyConstants {
            a_minus: 1.0,
            r_minus: b - a,
            a_plus: 2.0,
            r_plus: b - a,
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassProperty {
    Minimal,
    Maximal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// A ball where `ratio = P{B(x, r)} / (p(x) r^d)` falls outside the
    /// allowed bound.
    Ball {
        property: MassProperty,
        x: f64,
        r: f64,
        ratio: f64,
        bound: f64,
    },
    /// A truncation point past which the integral stops converging.
    Integral {
        exponent: f64,
        at: f64,
        ratio: f64,
        partial: f64,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Ball {
                property,
                x,
                r,
                ratio,
                bound,
            } => {
                let (name, rel) = match property {
                    MassProperty::Minimal => ("minimal mass", "<"),
                    MassProperty::Maximal => ("maximal mass", ">"),
                };
                write!(
                    f,
                    "{name} fails at x={x}, r={r}: P(B)/(p r^d) = {ratio:.6e} {rel} {bound:.6e}"
                )
            }
            Witness::Integral {
                exponent,
                at,
                ratio,
                partial,
            } => write!(
                f,
                "exponent {exponent}: tail contributions stop shrinking by x={at:.6e} \
                 (successive ratio {ratio:.6}, partial integral {partial:.6e})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated(Witness),
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "Satisfied",
            Verdict::Violated(_) => "Violated",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub verdict: Verdict,
    pub detail: String,
}

impl DiagnosticReport {
    pub fn is_satisfied(&self) -> bool {
        matches!(self.verdict, Verdict::Satisfied)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.verdict, Verdict::Violated(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Violated(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for DiagnosticReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.verdict.label(), self.detail)?;
        if let Some(w) = self.witness() {
            write!(f, "; witness: {w}")?;
        }
        Ok(())
    }
}

// Relative slack for comparing exact ball masses against bounds that are
// attained with equality (e.g. the exponential maximal mass at r = r_+).
const MASS_REL_TOL: f64 = 1e-12;

/// Checks both mass properties on a grid of centres and radii.
///
/// The minimal mass inequality is checked at every grid centre for radii in
/// `(0, r_−]`, the maximal one at centres in the support for radii in
/// `(0, r_+]`. When several grid points violate, the witness is the most
/// severe one (largest factor by which the bound is missed).
pub fn check_mass_properties(
    spec: &DistributionSpec,
    constants: &MassPropertyConstants,
    x_grid: &[f64],
    r_grid: &[f64],
) -> Result<DiagnosticReport> {
    spec.validate()?;
    MassPropertyConstants::new(
        constants.a_minus,
        constants.r_minus,
        constants.a_plus,
        constants.r_plus,
    )?;
    if x_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::invalid("grid", "x and r grids must be nonempty"));
    }
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("x_grid", "entries must be finite"));
    }
    if r_grid.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::invalid(
            "r_grid",
            "radii must be positive and finite",
        ));
    }
    let d = spec.dim() as i32;

    let mut worst: Option<(f64, Witness)> = None;
    let mut violations = 0usize;
    let mut checked = 0usize;
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0_f64);
    for &x in x_grid {
        let p = spec.pdf1(x);
        for &r in r_grid {
            let mass = spec.ball_mass(x, r)?;
            if r <= constants.r_minus {
                checked += 1;
                let lower = constants.a_minus * p * r.powi(d);
                if p > 0.0 {
                    min_ratio = min_ratio.min(mass / (p * r.powi(d)));
                }
                if mass < lower * (1.0 - MASS_REL_TOL) {
                    violations += 1;
                    let ratio = mass / (p * r.powi(d));
                    let severity = constants.a_minus / ratio;
                    if worst.as_ref().is_none_or(|(s, _)| severity > *s) {
                        worst = Some((
                            severity,
                            Witness::Ball {
                                property: MassProperty::Minimal,
                                x,
                                r,
                                ratio,
                                bound: constants.a_minus,
                            },
                        ));
                    }
                }
            }
            if p > 0.0 && r <= constants.r_plus {
                checked += 1;
                let ratio = mass / (p * r.powi(d));
                max_ratio = max_ratio.max(ratio);
                if ratio > constants.a_plus * (1.0 + MASS_REL_TOL) {
                    violations += 1;
                    let severity = ratio / constants.a_plus;
                    if worst.as_ref().is_none_or(|(s, _)| severity > *s) {
                        worst = Some((
                            severity,
                            Witness::Ball {
                                property: MassProperty::Maximal,
                                x,
                                r,
                                ratio,
                                bound: constants.a_plus,
                            },
                        ));
                    }
                }
            }
        }
    }
    let detail = format!(
        "{checked} inequalities checked, {violations} violated; \
         P(B)/(p r^d) ranged over [{min_ratio:.6e}, {max_ratio:.6e}] \
         against a_- = {:.6e}, a_+ = {:.6e}",
        constants.a_minus, constants.a_plus
    );
    Ok(DiagnosticReport {
        verdict: match worst {
            Some((_, w)) => Verdict::Violated(w),
            None => Verdict::Satisfied,
        },
        detail,
    })
}

/// Centres used by default when checking the mass properties: `[0, 10/λ]`
/// for exponentials, `[1, 50]` for Pareto, `μ ± 12σ` for Gaussians and the
/// support widened by half its length on each side for uniforms.
pub fn default_x_grid(spec: &DistributionSpec, points: usize) -> Vec<f64> {
    let (lo, hi) = match *spec {
        DistributionSpec::Exponential { lambda } => (0.0, 10.0 / lambda),
        DistributionSpec::Pareto { .. } => (1.0, 50.0),
        DistributionSpec::Gaussian { mu, sigma } => (mu - 12.0 * sigma, mu + 12.0 * sigma),
        DistributionSpec::Uniform { a, b, .. } => (a - 0.5 * (b - a), b + 0.5 * (b - a)),
    };
    let points = points.max(2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Radii `0.05, 0.10, …, 1`.
pub fn default_r_grid() -> Vec<f64> {
    (1..=20).map(|i| 0.05 * i as f64).collect()
}

/// Supremum of the exponents γ for which `∫ q/p^γ < ∞`.
pub fn dre_threshold(source: &DistributionSpec, target: &DistributionSpec) -> Result<f64> {
    source.validate()?;
    target.validate()?;
    match (*source, *target) {
        (
            DistributionSpec::Exponential { lambda: lp },
            DistributionSpec::Exponential { lambda: lq },
        ) => Ok(lq / lp),
        (DistributionSpec::Pareto { alpha: ap }, DistributionSpec::Pareto { alpha: aq }) => {
            Ok(aq / (ap + 1.0))
        }
        (s @ DistributionSpec::Uniform { .. }, t @ DistributionSpec::Uniform { .. }) if s == t => {
            Ok(f64::INFINITY)
        }
        _ => Err(Error::Unsupported(format!(
            "density ratio exponent threshold for {} source and {} target",
            source.family_name(),
            target.family_name()
        ))),
    }
}

/// Supremum of the ρ for which `∫ q^{d/(ρ+d)} < ∞`.
pub fn pm_threshold(target: &DistributionSpec) -> f64 {
    match *target {
        DistributionSpec::Pareto { alpha } => alpha,
        _ => f64::INFINITY,
    }
}

fn require_1d(spec: &DistributionSpec) -> Result<()> {
    spec.validate()?;
    if spec.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "numeric integral checks need one-dimensional designs, got d = {}",
            spec.dim()
        )));
    }
    Ok(())
}

/// `exp(ln q − γ ln p)`, with `q/0 = +∞` and `0/p = 0`.
fn ratio_integrand(
    source: &DistributionSpec,
    target: &DistributionSpec,
    gamma: f64,
    x: f64,
) -> f64 {
    let lq = target.ln_pdf1(x);
    if lq == f64::NEG_INFINITY {
        return 0.0;
    }
    let lp = source.ln_pdf1(x);
    if lp == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (lq - gamma * lp).exp()
}

fn integrate_target_support<F: Fn(f64) -> f64>(
    target: &DistributionSpec,
    g: &F,
    budget: &QuadratureBudget,
) -> TailOutcome {
    let (lo, hi) = target.support();
    integrate_over(g, lo, hi, target.anchor(), target.scale(), budget)
}

fn report_from(outcome: TailOutcome, exponent: f64, what: &str) -> DiagnosticReport {
    match outcome {
        TailOutcome::Converged { value, segments } => DiagnosticReport {
            verdict: Verdict::Satisfied,
            detail: format!("{what} = {value:.10e} (converged after {segments} segments)"),
        },
        TailOutcome::Diverged { at, ratio, partial } => DiagnosticReport {
            verdict: Verdict::Violated(Witness::Integral {
                exponent,
                at,
                ratio,
                partial,
            }),
            detail: format!("{what} diverges"),
        },
        TailOutcome::Inconclusive { partial, segments } => DiagnosticReport {
            verdict: Verdict::Inconclusive,
            detail: format!(
                "{what}: budget exhausted after {segments} segments, partial integral {partial:.6e}"
            ),
        },
    }
}

/// Numerical check of `∫ q(x)/p(x)^γ dx < ∞`.
pub fn check_dre_numeric(
    source: &DistributionSpec,
    target: &DistributionSpec,
    gamma: f64,
    budget: &QuadratureBudget,
) -> Result<DiagnosticReport> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(
            "gamma",
            format!("must be positive, got {gamma}"),
        ));
    }
    require_1d(source)?;
    require_1d(target)?;
    let g = |x: f64| ratio_integrand(source, target, gamma, x);
    let outcome = integrate_target_support(target, &g, budget);
    Ok(report_from(outcome, gamma, &format!("∫ q/p^{gamma}")))
}

/// Numerical check of the pseudo-moment condition `∫ q^{d/(ρ+d)} < ∞`.
pub fn check_pseudo_moment(
    target: &DistributionSpec,
    rho: f64,
    budget: &QuadratureBudget,
) -> Result<DiagnosticReport> {
    if !(rho > 0.0) || rho.is_nan() {
        return Err(Error::invalid(
            "rho",
            format!("must be positive, got {rho}"),
        ));
    }
    require_1d(target)?;
    let power = 1.0 / (rho + 1.0);
    let g = |x: f64| (power * target.ln_pdf1(x)).exp();
    let outcome = integrate_target_support(target, &g, budget);
    Ok(report_from(outcome, rho, &format!("∫ q^{power:.6}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailFunctional {
    /// `T_P(t) = ∫ q / p^t`.
    Source,
    /// `T_Q(t) = ∫ q^{1−t}`.
    Target,
}

/// `T_P(t)` or `T_Q(t)`; `+∞` when the integral diverges.
pub fn tail_functional(
    source: &DistributionSpec,
    target: &DistributionSpec,
    t: f64,
    which: TailFunctional,
    budget: &QuadratureBudget,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    require_1d(source)?;
    require_1d(target)?;
    let outcome = match which {
        TailFunctional::Source => {
            let g = |x: f64| ratio_integrand(source, target, t, x);
            integrate_target_support(target, &g, budget)
        }
        TailFunctional::Target => {
            let g = |x: f64| ((1.0 - t) * target.ln_pdf1(x)).exp();
            integrate_target_support(target, &g, budget)
        }
    };
    match outcome {
        TailOutcome::Converged { value, .. } => Ok(value),
        TailOutcome::Diverged { .. } => Ok(f64::INFINITY),
        TailOutcome::Inconclusive { segments, .. } => Err(Error::Unsupported(format!(
            "tail functional at t = {t} did not settle within {segments} segments"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn exponential_mass_properties_hold() {
        let spec = DistributionSpec::exponential(1.0);
        let c = family_mass_constants(&spec).unwrap();
        let rs: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
        let rep = check_mass_properties(&spec, &c, &grid(0.0, 10.0, 401), &rs).unwrap();
        assert!(rep.is_satisfied(), "{rep}");
    }

    #[test]
    fn exponential_maximal_bound_is_tight() {
        // at r = r_+ the interior ratio equals 2 sinh(λ)/λ exactly
        let spec = DistributionSpec::exponential(2.0);
        let mut c = family_mass_constants(&spec).unwrap();
        c.a_plus *= 1.0 - 1e-6;
        let rep = check_mass_properties(&spec, &c, &[3.0], &[1.0]).unwrap();
        assert!(rep.is_violated());
    }

    #[test]
    fn pareto_minimal_mass_fails_at_support_edge() {
        // P{B(1, r)} = 1 − (1+r)^{−α} < 2 p(1) r for every r > 0
        for alpha in [1.0, 2.0] {
            let spec = DistributionSpec::pareto(alpha);
            let c = family_mass_constants(&spec).unwrap();
            let rs: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
            let rep = check_mass_properties(&spec, &c, &grid(1.0, 50.0, 491), &rs).unwrap();
            match rep.witness() {
                Some(Witness::Ball {
                    property: MassProperty::Minimal,
                    x,
                    r,
                    ratio,
                    ..
                }) => {
                    let expected = (1.0 - (1.0 + r).powf(-alpha)) / (alpha * r);
                    assert_eq!(*x, 1.0);
                    assert_relative_eq!(*ratio, expected, max_relative = 1e-12);
                }
                other => panic!("{other:?}"),
            }
            // the maximal mass half holds on its own
            let loose = MassPropertyConstants { a_minus: 1e-3, ..c };
            assert!(
                check_mass_properties(&spec, &loose, &grid(1.0, 50.0, 491), &rs)
                    .unwrap()
                    .is_satisfied()
            );
        }
    }

    #[test]
    fn pareto_minimal_mass_interior_ratio_exceeds_two() {
        // away from the edge the density is convex, so the ball mass is at
        // least 2 r p(x)
        let spec = DistributionSpec::pareto(1.5);
        let c = family_mass_constants(&spec).unwrap();
        let rs: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        let rep = check_mass_properties(&spec, &c, &grid(1.5, 50.0, 300), &rs).unwrap();
        assert!(rep.is_satisfied(), "{rep}");
    }

    #[test]
    fn gaussian_violates_maximal_mass() {
        let spec = DistributionSpec::gaussian(0.0, 1.0);
        let c = MassPropertyConstants::reference();
        let rep = check_mass_properties(&spec, &c, &grid(-12.0, 12.0, 97), &[1.0]).unwrap();
        match rep.witness() {
            Some(Witness::Ball {
                property: MassProperty::Maximal,
                x,
                r,
                ratio,
                ..
            }) => {
                assert_eq!(x.abs(), 12.0);
                // P{B(x,r)}/(φ(x) r) ≈ e^{xr − r²/2}/(x r) for large x
                let approx = (12.0 * r - r * r / 2.0).exp() / (12.0 * r);
                assert!((ratio / approx - 1.0).abs() < 0.1, "{ratio} vs {approx}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mass_check_rejects_bad_grids() {
        let spec = DistributionSpec::exponential(1.0);
        let c = MassPropertyConstants::reference();
        assert!(check_mass_properties(&spec, &c, &[], &[0.1]).is_err());
        assert!(check_mass_properties(&spec, &c, &[0.0], &[]).is_err());
        assert!(check_mass_properties(&spec, &c, &[0.0], &[-0.1]).is_err());
        assert!(MassPropertyConstants::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn thresholds() {
        let e = DistributionSpec::exponential;
        let p = DistributionSpec::pareto;
        assert_eq!(dre_threshold(&e(1.0), &e(2.0)).unwrap(), 2.0);
        assert_eq!(dre_threshold(&p(1.0), &p(3.0)).unwrap(), 1.5);
        let u = DistributionSpec::uniform(0.0, 1.0, 1);
        assert_eq!(dre_threshold(&u, &u).unwrap(), f64::INFINITY);
        assert!(dre_threshold(&u, &DistributionSpec::uniform(0.0, 2.0, 1)).is_err());
        assert!(dre_threshold(&e(1.0), &p(1.0)).is_err());
    }

    #[test]
    fn dre_exponential_examples() {
        let b = QuadratureBudget::default();
        let (s, t) = (
            DistributionSpec::exponential(1.0),
            DistributionSpec::exponential(2.0),
        );
        assert!(check_dre_numeric(&s, &t, 1.5, &b).unwrap().is_satisfied());
        assert!(check_dre_numeric(&s, &t, 2.0, &b).unwrap().is_violated());
        assert!(check_dre_numeric(&s, &t, 2.5, &b).unwrap().is_violated());
        assert!(check_dre_numeric(&s, &t, 0.0, &b).is_err());
    }

    #[test]
    fn dre_pareto_boundary_is_violated() {
        let b = QuadratureBudget::default();
        let (s, t) = (DistributionSpec::pareto(1.0), DistributionSpec::pareto(3.0));
        assert!(check_dre_numeric(&s, &t, 1.35, &b).unwrap().is_satisfied());
        assert!(check_dre_numeric(&s, &t, 1.5, &b).unwrap().is_violated());
        assert!(check_dre_numeric(&s, &t, 1.65, &b).unwrap().is_violated());
    }

    #[test]
    fn dre_support_mismatch() {
        let b = QuadratureBudget::default();
        let s = DistributionSpec::uniform(0.0, 1.0, 1);
        let t = DistributionSpec::uniform(0.5, 1.5, 1);
        assert!(check_dre_numeric(&s, &t, 0.5, &b).unwrap().is_violated());
        assert!(check_dre_numeric(&s, &s, 5.0, &b).unwrap().is_satisfied());
    }

    #[test]
    fn pseudo_moment() {
        let b = QuadratureBudget::default();
        // ∫_1^∞ x^{-(α+1)/(ρ+1)} converges iff ρ < α
        let par = DistributionSpec::pareto(3.0);
        assert!(check_pseudo_moment(&par, 2.0, &b).unwrap().is_satisfied());
        assert!(check_pseudo_moment(&par, 3.0, &b).unwrap().is_violated());
        assert!(check_pseudo_moment(&par, 4.0, &b).unwrap().is_violated());
        assert!(
            check_pseudo_moment(&DistributionSpec::exponential(1.5), 100.0, &b)
                .unwrap()
                .is_satisfied()
        );
        assert!(
            check_pseudo_moment(&DistributionSpec::gaussian(0.0, 1.0), 10.0, &b)
                .unwrap()
                .is_satisfied()
        );
        assert!(check_pseudo_moment(&par, 0.0, &b).is_err());
    }

    #[test]
    fn pseudo_moment_value_matches_closed_form() {
        // Exp(λ): ∫ λ^{1/(ρ+1)} e^{−λx/(ρ+1)} = λ^{1/(ρ+1)} (ρ+1)/λ
        let b = QuadratureBudget::default();
        let rep = check_pseudo_moment(&DistributionSpec::exponential(2.0), 3.0, &b).unwrap();
        assert!(rep.detail.contains("converged"));
        let t = tail_functional(
            &DistributionSpec::exponential(2.0),
            &DistributionSpec::exponential(2.0),
            0.75,
            TailFunctional::Target,
            &b.with_rel_tol(1e-12),
        )
        .unwrap();
        assert_relative_eq!(t, 2.0_f64.powf(0.25) * 4.0 / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn tail_functional_exponential() {
        let b = QuadratureBudget::default().with_rel_tol(1e-12);
        let (s, t) = (
            DistributionSpec::exponential(1.0),
            DistributionSpec::exponential(2.0),
        );
        let v = tail_functional(&s, &t, 1.0, TailFunctional::Source, &b).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
        let small = tail_functional(&s, &t, 1e-6, TailFunctional::Source, &b).unwrap();
        assert!((small - 1.0).abs() < 1e-5);
        // closed form 2/(2 − t) near the threshold
        let near = tail_functional(&s, &t, 1.99, TailFunctional::Source, &b).unwrap();
        assert_relative_eq!(near, 200.0, max_relative = 1e-8);
        assert_eq!(
            tail_functional(&s, &t, 2.2, TailFunctional::Source, &b).unwrap(),
            f64::INFINITY
        );
    }
}
