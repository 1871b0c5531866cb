//! Standard and local k-NN regressors, one- and two-sample.
//!
//! A regressor averages the labels of the `k(x)` canonical nearest neighbours
//! of `x`. The neighbour function `k` is either a constant (standard k-NN) or
//! a density-adaptive schedule driven by an ℓ-NN density estimate (local
//! k-NN). The two-sample regressor pools the `k_P(x)` nearest source labels
//! and the `k_Q(x)` nearest target labels.

use std::sync::Arc;

use crate::density::{DensityEstimator, DensityValue};
use crate::error::{Error, Result};
use crate::neighbors::{NeighborIndex, PointCloud, QueryScratch};
use crate::scalar::{ceil_to_usize, Scalar};

/// Covariates with one real label per point.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    cloud: PointCloud<T>,
    labels: Vec<T>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(cloud: PointCloud<T>, labels: Vec<T>) -> Result<Self> {
        if cloud.len() != labels.len() {
            return Err(Error::LengthMismatch {
                points: cloud.len(),
                labels: labels.len(),
            });
        }
        if let Some(index) = labels.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFiniteLabel { index });
        }
        Ok(Self { cloud, labels })
    }

    pub fn cloud(&self) -> &PointCloud<T> {
        &self.cloud
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn into_parts(self) -> (PointCloud<T>, Vec<T>) {
        (self.cloud, self.labels)
    }
}

/// `⌈max(1, ln n)⌉`, the lower clamp of the local schedule.
pub fn log_floor(n: usize) -> usize {
    ceil_to_usize((n as f64).ln()).max(1)
}

/// `min(n, max(⌈κ ln(L)^{d/(2β+d)} (n p̂)^{2β/(2β+d)}⌉, ⌈ln n⌉))`.
///
/// `p̂ = +∞` maps to the cap `n` and `p̂ = 0` to the floor. The floor is at
/// least 1 so that `n < 3` still yields a valid count.
pub fn local_count<T: Scalar>(
    kappa: T,
    beta: T,
    dim: usize,
    n: usize,
    log_arg: usize,
    density: DensityValue<T>,
) -> usize {
    let floor = log_floor(n).min(n);
    let p = match density {
        DensityValue::Infinite => return n,
        DensityValue::Finite(p) if p.is_infinite() => return n,
        DensityValue::Finite(p) => p,
    };
    if !(p > T::zero()) {
        return floor;
    }
    let two_beta = beta + beta;
    let d = T::from_usize_lossy(dim);
    let denom = two_beta + d;
    let log_term = T::from_usize_lossy(log_arg).ln().powf(d / denom);
    let mass_term = (T::from_usize_lossy(n) * p).powf(two_beta / denom);
    let raw = ceil_to_usize(kappa * log_term * mass_term);
    raw.max(floor).min(n)
}

/// Where the local schedule gets its density from.
#[derive(Debug, Clone)]
pub enum DensitySource<T> {
    Estimated(DensityEstimator<T>),
    /// A fixed value used for every `x`; turns the local schedule into a
    /// constant one.
    Fixed(DensityValue<T>),
}

#[derive(Debug, Clone)]
pub struct LocalSchedule<T> {
    pub kappa: T,
    pub beta: T,
    pub dim: usize,
    pub density: DensitySource<T>,
    /// Argument of the logarithm inside the power term: `n` for one sample,
    /// `n + m` for two.
    pub log_arg: usize,
    /// Sample size `n`: upper clamp and argument of the `⌈ln n⌉` floor.
    pub cap: usize,
}

/// A rule `x ↦ k(x) ∈ {1, …, n}`.
#[derive(Debug, Clone)]
pub enum NeighborFunction<T> {
    Constant(usize),
    LocalAdaptive(LocalSchedule<T>),
}

impl<T: Scalar> NeighborFunction<T> {
    pub fn constant(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::NeighborCountOutOfRange { k, n });
        }
        Ok(NeighborFunction::Constant(k))
    }

    pub fn local(schedule: LocalSchedule<T>) -> Result<Self> {
        if !(schedule.kappa > T::zero()) || !schedule.kappa.is_finite() {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if !(schedule.beta > T::zero()) || !schedule.beta.is_finite() {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        if schedule.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if schedule.cap == 0 {
            return Err(Error::EmptyCloud);
        }
        if schedule.log_arg < schedule.cap {
            return Err(Error::invalid(
                "log_arg",
                "must be at least the sample size",
            ));
        }
        if let DensitySource::Estimated(est) = &schedule.density {
            if est.dim() != schedule.dim {
                return Err(Error::DimensionMismatch {
                    expected: schedule.dim,
                    found: est.dim(),
                });
            }
        }
        Ok(NeighborFunction::LocalAdaptive(schedule))
    }

    /// `k(x)`.
    pub fn evaluate(&self, x: &[T]) -> Result<usize> {
        self.evaluate_with(&mut QueryScratch::default(), x)
    }

    pub fn evaluate_with(&self, scratch: &mut QueryScratch<T>, x: &[T]) -> Result<usize> {
        match self {
            NeighborFunction::Constant(k) => Ok(*k),
            NeighborFunction::LocalAdaptive(s) => {
                if x.len() != s.dim {
                    return Err(Error::DimensionMismatch {
                        expected: s.dim,
                        found: x.len(),
                    });
                }
                let density = match &s.density {
                    DensitySource::Estimated(est) => est.estimate_with(scratch, x)?,
                    DensitySource::Fixed(v) => *v,
                };
                Ok(local_count(
                    s.kappa, s.beta, s.dim, s.cap, s.log_arg, density,
                ))
            }
        }
    }
}

/// How the ℓ of the density estimator is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllRule {
    /// `ℓ = ⌈c · ln L⌉` with `L` the schedule's log argument, clamped to
    /// `{1, …, n}`.
    Multiplier(f64),
    Fixed(usize),
}

impl Default for EllRule {
    fn default() -> Self {
        EllRule::Multiplier(3.0)
    }
}

/// Parameters of a local schedule, resolved against a sample at fit time.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalParams<T> {
    pub kappa: T,
    pub beta: T,
    pub ell: EllRule,
    pub normalize_volume: bool,
    pub density_override: Option<T>,
}

impl<T: Scalar> LocalParams<T> {
    pub fn new(kappa: T, beta: T) -> Self {
        Self {
            kappa,
            beta,
            ell: EllRule::default(),
            normalize_volume: false,
            density_override: None,
        }
    }
}

/// Neighbour-count specification for one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborSpec<T> {
    Constant(usize),
    Local(LocalParams<T>),
}

/// One sample together with its index and neighbour function.
#[derive(Debug, Clone)]
pub struct SampleArm<T> {
    labels: Vec<T>,
    index: Arc<NeighborIndex<T>>,
    neighbors: NeighborFunction<T>,
}

impl<T: Scalar> SampleArm<T> {
    fn fit(data: LabeledDataset<T>, spec: &NeighborSpec<T>, log_arg: usize) -> Result<Self> {
        let (cloud, labels) = data.into_parts();
        let index = Arc::new(NeighborIndex::build(cloud)?);
        let n = index.len();
        let neighbors = match spec {
            NeighborSpec::Constant(k) => NeighborFunction::constant(*k, n)?,
            NeighborSpec::Local(p) => {
                let density = match p.density_override {
                    Some(v) if v.is_infinite() => DensitySource::Fixed(DensityValue::Infinite),
                    Some(v) => DensitySource::Fixed(DensityValue::Finite(v)),
                    None => {
                        let ell = match p.ell {
                            EllRule::Fixed(l) => l,
                            EllRule::Multiplier(c) => {
                                crate::density::recommended_ell(log_arg, c).min(n)
                            }
                        };
                        DensitySource::Estimated(
                            DensityEstimator::new(index.clone(), ell)?
                                .with_normalized_volume(p.normalize_volume),
                        )
                    }
                };
                NeighborFunction::local(LocalSchedule {
                    kappa: p.kappa,
                    beta: p.beta,
                    dim: index.dim(),
                    density,
                    log_arg,
                    cap: n,
                })?
            }
        };
        Ok(Self {
            labels,
            index,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index(&self) -> &Arc<NeighborIndex<T>> {
        &self.index
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn neighbor_function(&self) -> &NeighborFunction<T> {
        &self.neighbors
    }

    /// `(k(x), Σ_{i ≤ k(x)} Y_i(x))`.
    fn count_and_sum(&self, scratch: &mut QueryScratch<T>, x: &[T]) -> Result<(usize, T)> {
        let k = self.neighbors.evaluate_with(scratch, x)?;
        let nn = self.index.k_nearest_with(scratch, x, k)?;
        let sum = nn
            .indices
            .iter()
            .fold(T::zero(), |acc, &i| acc + self.labels[i]);
        Ok((k, sum))
    }

    fn predict_with(&self, scratch: &mut QueryScratch<T>, x: &[T]) -> Result<T> {
        let (k, sum) = self.count_and_sum(scratch, x)?;
        Ok(sum / T::from_usize_lossy(k))
    }
}

/// Decomposition of a two-sample prediction:
/// `f̂ = w_P f̂_P + w_Q f̂_Q` with `w_P = k_P/(k_P + k_Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleParts<T> {
    pub k_source: usize,
    pub k_target: usize,
    pub source_mean: Option<T>,
    pub target_mean: Option<T>,
    pub weight_source: T,
    pub weight_target: T,
}

#[derive(Debug, Clone)]
pub enum Regressor<T> {
    OneSample(SampleArm<T>),
    TwoSample {
        source: Option<SampleArm<T>>,
        target: Option<SampleArm<T>>,
    },
}

impl<T: Scalar> Regressor<T> {
    pub fn one_sample(data: LabeledDataset<T>, spec: &NeighborSpec<T>) -> Result<Self> {
        let n = data.len();
        Ok(Regressor::OneSample(SampleArm::fit(data, spec, n)?))
    }

    /// Standard k-NN with a constant `k`.
    pub fn standard(data: LabeledDataset<T>, k: usize) -> Result<Self> {
        Self::one_sample(data, &NeighborSpec::Constant(k))
    }

    /// Local k-NN with the density-adaptive schedule.
    pub fn local(data: LabeledDataset<T>, params: LocalParams<T>) -> Result<Self> {
        Self::one_sample(data, &NeighborSpec::Local(params))
    }

    /// Two-sample regressor. Either sample may be absent (size 0) but not
    /// both. Local schedules use `ln(n + m)` inside the power term.
    pub fn two_sample(
        source: Option<(LabeledDataset<T>, NeighborSpec<T>)>,
        target: Option<(LabeledDataset<T>, NeighborSpec<T>)>,
    ) -> Result<Self> {
        let n = source.as_ref().map_or(0, |s| s.0.len());
        let m = target.as_ref().map_or(0, |t| t.0.len());
        if n + m == 0 {
            return Err(Error::EmptyCloud);
        }
        if let (Some(s), Some(t)) = (&source, &target) {
            if s.0.dim() != t.0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: s.0.dim(),
                    found: t.0.dim(),
                });
            }
        }
        let log_arg = n + m;
        let source = source
            .map(|(d, spec)| SampleArm::fit(d, &spec, log_arg))
            .transpose()?;
        let target = target
            .map(|(d, spec)| SampleArm::fit(d, &spec, log_arg))
            .transpose()?;
        Ok(Regressor::TwoSample { source, target })
    }

    pub fn dim(&self) -> usize {
        match self {
            Regressor::OneSample(arm) => arm.index.dim(),
            Regressor::TwoSample { source, target } => source
                .as_ref()
                .or(target.as_ref())
                .map(|a| a.index.dim())
                .expect("two-sample regressor has at least one sample"),
        }
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        self.predict_with(&mut QueryScratch::default(), x)
    }

    pub fn predict_with(&self, scratch: &mut QueryScratch<T>, x: &[T]) -> Result<T> {
        match self {
            Regressor::OneSample(arm) => arm.predict_with(scratch, x),
            Regressor::TwoSample { source, target } => match (source, target) {
                (Some(arm), None) | (None, Some(arm)) => arm.predict_with(scratch, x),
                (Some(p), Some(q)) => {
                    let (kp, sp) = p.count_and_sum(scratch, x)?;
                    let (kq, sq) = q.count_and_sum(scratch, x)?;
                    Ok((sp + sq) / T::from_usize_lossy(kp + kq))
                }
                (None, None) => unreachable!("rejected at construction"),
            },
        }
    }

    pub fn predict_many(&self, points: &PointCloud<T>) -> Result<Vec<T>> {
        let mut scratch = QueryScratch::default();
        points
            .iter()
            .map(|x| self.predict_with(&mut scratch, x))
            .collect()
    }

    /// Component predictions and weights of a two-sample regressor.
    pub fn two_sample_parts(&self, x: &[T]) -> Result<TwoSampleParts<T>> {
        let Regressor::TwoSample { source, target } = self else {
            return Err(Error::Unsupported(
                "two_sample_parts on a one-sample regressor".into(),
            ));
        };
        let mut scratch = QueryScratch::default();
        let mut eval = |arm: &Option<SampleArm<T>>| -> Result<(usize, Option<T>)> {
            match arm {
                Some(a) => {
                    let (k, s) = a.count_and_sum(&mut scratch, x)?;
                    Ok((k, Some(s / T::from_usize_lossy(k))))
                }
                None => Ok((0, None)),
            }
        };
        let (kp, fp) = eval(source)?;
        let (kq, fq) = eval(target)?;
        let total = T::from_usize_lossy(kp + kq);
        let wp = T::from_usize_lossy(kp) / total;
        Ok(TwoSampleParts {
            k_source: kp,
            k_target: kq,
            source_mean: fp,
            target_mean: fq,
            weight_source: wp,
            weight_target: T::one() - wp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line_data(labels: &[f64]) -> LabeledDataset<f64> {
        let xs: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        LabeledDataset::new(PointCloud::from_values(&xs).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn dataset_validation() {
        let cloud = PointCloud::from_values(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            LabeledDataset::new(cloud.clone(), vec![1.0]),
            Err(Error::LengthMismatch {
                points: 2,
                labels: 1
            })
        ));
        assert!(matches!(
            LabeledDataset::new(cloud, vec![1.0, f64::INFINITY]),
            Err(Error::NonFiniteLabel { index: 1 })
        ));
    }

    #[test]
    fn local_count_clamps() {
        let n = 1024;
        assert_eq!(local_count(1.0, 1.0, 1, n, n, DensityValue::Finite(0.0)), 7);
        assert_eq!(local_count(1.0, 1.0, 1, n, n, DensityValue::Infinite), n);
        assert_eq!(
            local_count(1.0, 1.0, 1, n, n, DensityValue::Finite(f64::INFINITY)),
            n
        );
        // (ln 1024)^{1/3} · 1024^{2/3} = 1.906668 · 101.593667 = 193.705
        assert_eq!(
            local_count(1.0, 1.0, 1, n, n, DensityValue::Finite(1.0)),
            194
        );
        assert_eq!(local_count(1.0, 1.0, 1, 2, 2, DensityValue::Finite(0.0)), 1);
        assert_eq!(local_count(1.0, 1.0, 1, 1, 1, DensityValue::Finite(0.0)), 1);
    }

    #[test]
    fn local_count_monotone_in_density() {
        let mut prev = 0;
        for i in 0..200 {
            let p = 1e-6 * 1.15_f64.powi(i);
            let k = local_count(0.7, 0.5, 2, 5000, 6000, DensityValue::Finite(p));
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn line_prediction() {
        let reg = Regressor::standard(line_data(&[0.0, 10.0, 20.0, 30.0]), 2).unwrap();
        assert_eq!(reg.predict(&[0.4]).unwrap(), 5.0);
        let full = Regressor::standard(line_data(&[0.0, 10.0, 20.0, 30.0]), 4).unwrap();
        assert_eq!(full.predict(&[100.0]).unwrap(), 15.0);
        assert!(reg.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn constant_labels() {
        let data = line_data(&[3.5; 40]);
        for k in [1, 7, 40] {
            let reg = Regressor::standard(data.clone(), k).unwrap();
            assert_eq!(reg.predict(&[12.3]).unwrap(), 3.5);
        }
        let local = Regressor::local(data, LocalParams::new(1.0, 1.0)).unwrap();
        assert_eq!(local.predict(&[-4.0]).unwrap(), 3.5);
    }

    #[test]
    fn two_sample_hand_example() {
        let src = LabeledDataset::new(PointCloud::from_values(&[0.0]).unwrap(), vec![0.0]).unwrap();
        let tgt =
            LabeledDataset::new(PointCloud::from_values(&[1.0]).unwrap(), vec![10.0]).unwrap();
        let reg = Regressor::two_sample(
            Some((src, NeighborSpec::Constant(1))),
            Some((tgt, NeighborSpec::Constant(1))),
        )
        .unwrap();
        assert_eq!(reg.predict(&[0.5]).unwrap(), 5.0);
        let parts = reg.two_sample_parts(&[0.5]).unwrap();
        assert_eq!(parts.weight_source, 0.5);
        assert_eq!(parts.weight_target, 0.5);
    }

    #[test]
    fn two_sample_requires_a_sample() {
        assert!(Regressor::<f64>::two_sample(None, None).is_err());
    }

    #[test]
    fn two_sample_without_target_is_one_sample() {
        let data = line_data(&[1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0]);
        let params = LocalParams::new(1.0, 1.0);
        let one = Regressor::local(data.clone(), params.clone()).unwrap();
        let two = Regressor::two_sample(Some((data, NeighborSpec::Local(params))), None).unwrap();
        for x in [-1.0, 0.3, 2.5, 6.0, 10.0] {
            assert_eq!(one.predict(&[x]).unwrap(), two.predict(&[x]).unwrap());
        }
    }

    #[test]
    fn fixed_density_reduces_to_constant() {
        let labels: Vec<f64> = (0..200).map(|i| ((i * 37) % 11) as f64).collect();
        let data = line_data(&labels);
        let mut params = LocalParams::new(1.3, 1.0);
        params.density_override = Some(0.2);
        let k = local_count(1.3, 1.0, 1, 200, 200, DensityValue::Finite(0.2));
        let local = Regressor::local(data.clone(), params).unwrap();
        let standard = Regressor::standard(data, k).unwrap();
        for i in 0..50 {
            let x = [i as f64 * 4.1 - 3.0];
            assert_eq!(local.predict(&x).unwrap(), standard.predict(&x).unwrap());
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let src = line_data(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let tgt = line_data(&[0.0, 0.0, 1.0]);
        let reg = Regressor::two_sample(
            Some((src, NeighborSpec::Constant(3))),
            Some((tgt, NeighborSpec::Constant(2))),
        )
        .unwrap();
        let parts = reg.two_sample_parts(&[2.2]).unwrap();
        assert_relative_eq!(parts.weight_source + parts.weight_target, 1.0);
        assert_relative_eq!(parts.weight_source, 0.6);
        let combined = parts.weight_source * parts.source_mean.unwrap()
            + parts.weight_target * parts.target_mean.unwrap();
        assert_relative_eq!(combined, reg.predict(&[2.2]).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn f32_regressor() {
        let cloud = PointCloud::<f32>::from_values(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let data = LabeledDataset::new(cloud, vec![0.0, 10.0, 20.0, 30.0]).unwrap();
        let reg = Regressor::standard(data, 2).unwrap();
        assert_eq!(reg.predict(&[0.4]).unwrap(), 5.0);
    }
}
