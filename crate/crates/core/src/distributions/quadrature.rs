//! Adaptive Gauss–Kronrod quadrature and convergence classification of
//! improper integrals over doubling truncations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7–K15 panel: `(kronrod estimate, |kronrod − gauss|)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // odd Kronrod nodes are the Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive bisection on the panel with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (value, error) = gauss_kronrod_15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut panels = 1;
    loop {
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err <= target || !total.is_finite() {
            break;
        }
        if panels >= max_panels {
            return QuadResult {
                value: total,
                error: total_err,
                converged: false,
            };
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel can no longer be split in floating point
            heap.push(worst);
            return QuadResult {
                value: total,
                error: total_err,
                converged: false,
            };
        }
        let (lv, le) = gauss_kronrod_15(f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        panels += 1;
    }
    // re-sum to shed the drift of the running updates
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        converged: value.is_finite(),
    }
}

/// Limits for the doubling-truncation protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureBudget {
    /// Maximum number of doubling segments per tail.
    pub max_segments: usize,
    /// Relative size of the remaining tail at which the integral counts as
    /// converged.
    pub rel_tol: f64,
    /// Panel budget of the adaptive rule on each segment.
    pub max_panels: usize,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self {
            max_segments: 1100,
            rel_tol: 1e-8,
            max_panels: 400,
        }
    }
}

impl QuadratureBudget {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Outcome of integrating a nonnegative function over an unbounded range.
#[derive(Debug, Clone, PartialEq)]
pub enum TailOutcome {
    /// Partial integrals Cauchy-converged; `value` includes the geometric
    /// extrapolation of the remaining tail.
    Converged {
        value: f64,
        segments: usize,
    },
    /// Tail contributions stopped shrinking: the integral is infinite.
    /// `at` is the right end of the segment that triggered the verdict and
    /// `ratio` the last ratio of successive contributions.
    Diverged {
        at: f64,
        ratio: f64,
        partial: f64,
    },
    Inconclusive {
        partial: f64,
        segments: usize,
    },
}

// Consecutive non-shrinking segments needed to call divergence.
const PLATEAU_RUN: usize = 4;
const PLATEAU_RATIO: f64 = 1.0 - 1e-6;
const SHAPE_TOL: f64 = 1e-9;

/// Integrates `g ≥ 0` over `[origin, origin + dir·∞)` using segments
/// `[origin, origin + scale]`, then `[origin + 2^{j-1} scale, origin + 2^j scale]`.
///
/// Divergence is declared when, for several consecutive segments, the
/// contribution does not shrink and the integrand's local power-law exponent
/// (measured on |x| when the segment does not straddle zero) is not bending
/// downward and not below −1. This flags constant, growing and `x^{-1}`
/// tails while leaving slowly decaying exponentials, whose contributions
/// grow only transiently, to converge.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    g: &F,
    origin: f64,
    dir: f64,
    scale: f64,
    budget: &QuadratureBudget,
) -> TailOutcome {
    let seg_tol = (budget.rel_tol * 1e-4).max(1e-14);
    let pos = |u: f64| origin + dir * u;

    let end = pos(scale);
    let first = integrate(
        g,
        origin.min(end),
        origin.max(end),
        0.0,
        seg_tol,
        budget.max_panels,
    );
    let mut sum = first.value;
    if !sum.is_finite() {
        return TailOutcome::Diverged {
            at: pos(scale),
            ratio: f64::INFINITY,
            partial: sum,
        };
    }

    let mut prev_contrib = first.value;
    let mut prev_shape: Option<f64> = None;
    let mut plateau = 0usize;
    let mut lo = scale;
    for seg in 1..=budget.max_segments {
        let hi = lo * 2.0;
        let (xa, xb) = (pos(lo), pos(hi));
        if !xb.is_finite() {
            return TailOutcome::Inconclusive {
                partial: sum,
                segments: seg,
            };
        }
        let (left, right) = if xa < xb { (xa, xb) } else { (xb, xa) };
        let c = integrate(g, left, right, 0.0, seg_tol, budget.max_panels).value;
        if !c.is_finite() {
            return TailOutcome::Diverged {
                at: xb,
                ratio: f64::INFINITY,
                partial: sum,
            };
        }
        sum += c;

        let (ga, gb) = (g(xa), g(xb));
        let shape = local_exponent(xa, xb, ga, gb);
        let ratio = if prev_contrib > 0.0 {
            c / prev_contrib
        } else if c > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let bending_up = match (prev_shape, shape) {
            (Some(p), Some(s)) => s >= p - SHAPE_TOL * (1.0 + p.abs()),
            _ => false,
        };

        // on a log scale a tail |x|^s is integrable iff s < −1
        let power_ok = match shape {
            Some(s) if xa != 0.0 && xa.signum() == xb.signum() => s >= -1.0 - SHAPE_TOL,
            _ => true,
        };
        if seg >= 2 && ratio >= PLATEAU_RATIO && bending_up && power_ok && c > 0.0 {
            plateau += 1;
            if plateau >= PLATEAU_RUN {
                return TailOutcome::Diverged {
                    at: xb,
                    ratio,
                    partial: sum,
                };
            }
        } else {
            plateau = 0;
        }

        if seg >= 3 {
            if c == 0.0 && prev_contrib == 0.0 {
                return TailOutcome::Converged {
                    value: sum,
                    segments: seg,
                };
            }
            let not_bending_up = match (prev_shape, shape) {
                (Some(p), Some(s)) => s <= p + SHAPE_TOL * (1.0 + p.abs()),
                _ => true,
            };
            if ratio < 1.0 && not_bending_up {
                let tail = c * ratio / (1.0 - ratio);
                if tail <= budget.rel_tol * sum {
                    return TailOutcome::Converged {
                        value: sum + tail,
                        segments: seg,
                    };
                }
            }
        }

        prev_contrib = c;
        prev_shape = shape;
        lo = hi;
    }
    TailOutcome::Inconclusive {
        partial: sum,
        segments: budget.max_segments,
    }
}

/// `d ln g / d ln |x|` between two points, or `d ln g / dx` scaled by the
/// segment length when the segment touches zero.
fn local_exponent(xa: f64, xb: f64, ga: f64, gb: f64) -> Option<f64> {
    if !(ga > 0.0 && gb > 0.0) {
        return None;
    }
    let dl = gb.ln() - ga.ln();
    if xa != 0.0 && xb != 0.0 && xa.signum() == xb.signum() {
        Some(dl / (xb.abs().ln() - xa.abs().ln()))
    } else {
        Some(dl)
    }
}

/// Integral of `g ≥ 0` over `[lo, hi]`, either end possibly infinite.
///
/// `anchor` is where unbounded tails start and `scale` their first segment
/// length. Returns the first divergent or inconclusive tail if any.
pub fn integrate_over<F: Fn(f64) -> f64>(
    g: &F,
    lo: f64,
    hi: f64,
    anchor: f64,
    scale: f64,
    budget: &QuadratureBudget,
) -> TailOutcome {
    let seg_tol = (budget.rel_tol * 1e-4).max(1e-14);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let r = integrate(g, lo, hi, 0.0, seg_tol, budget.max_panels * 4);
            if !r.value.is_finite() {
                TailOutcome::Diverged {
                    at: hi,
                    ratio: f64::INFINITY,
                    partial: r.value,
                }
            } else if r.converged {
                TailOutcome::Converged {
                    value: r.value,
                    segments: 1,
                }
            } else {
                TailOutcome::Inconclusive {
                    partial: r.value,
                    segments: 1,
                }
            }
        }
        (true, false) => integrate_tail(g, lo, 1.0, scale, budget),
        (false, true) => integrate_tail(g, hi, -1.0, scale, budget),
        (false, false) => {
            let right = integrate_tail(g, anchor, 1.0, scale, budget);
            let TailOutcome::Converged {
                value: rv,
                segments: rs,
            } = right
            else {
                return right;
            };
            match integrate_tail(g, anchor, -1.0, scale, budget) {
                TailOutcome::Converged { value, segments } => TailOutcome::Converged {
                    value: value + rv,
                    segments: segments + rs,
                },
                other => other,
            }
        }
    }
}
