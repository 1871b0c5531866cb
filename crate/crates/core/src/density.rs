//! The ℓ-nearest-neighbour density estimator `p̂(x) = ℓ / (n R_ℓ(x)^d)`.
//!
//! By default the estimate omits the volume of the unit ball, so it tracks
//! `v_d · p(x)` rather than `p(x)`. Neighbour schedules only need `p̂ ≍ p`;
//! callers wanting a consistent density set `normalize_volume`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::neighbors::{NeighborIndex, QueryScratch};
use crate::scalar::Scalar;

/// A density estimate. `Infinite` occurs when the query coincides with at
/// least ℓ sample points, so `R_ℓ(x) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> DensityValue<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, DensityValue::Infinite)
    }

    /// The estimate as a float, with `Infinite` mapped to `+∞`.
    pub fn value(&self) -> T {
        match *self {
            DensityValue::Finite(v) => v,
            DensityValue::Infinite => T::infinity(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityEstimator<T> {
    index: Arc<NeighborIndex<T>>,
    ell: usize,
    normalize_volume: bool,
}

impl<T: Scalar> DensityEstimator<T> {
    pub fn new(index: Arc<NeighborIndex<T>>, ell: usize) -> Result<Self> {
        let n = index.len();
        if ell == 0 || ell > n {
            return Err(Error::NeighborCountOutOfRange { k: ell, n });
        }
        Ok(Self {
            index,
            ell,
            normalize_volume: false,
        })
    }

    /// Divide by the unit-ball volume so that `p̂` estimates `p` itself.
    pub fn with_normalized_volume(mut self, on: bool) -> Self {
        self.normalize_volume = on;
        self
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn sample_size(&self) -> usize {
        self.index.len()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn index(&self) -> &Arc<NeighborIndex<T>> {
        &self.index
    }

    pub fn normalizes_volume(&self) -> bool {
        self.normalize_volume
    }

    pub fn estimate(&self, x: &[T]) -> Result<DensityValue<T>> {
        self.estimate_with(&mut QueryScratch::default(), x)
    }

    pub fn estimate_with(&self, scratch: &mut QueryScratch<T>, x: &[T]) -> Result<DensityValue<T>> {
        let radius = self.index.k_nearest_with(scratch, x, self.ell)?.radius();
        Ok(self.from_radius(radius))
    }

    /// `ℓ / (n r^d)` for a given ℓ-th neighbour radius `r`.
    pub fn from_radius(&self, radius: T) -> DensityValue<T> {
        if radius <= T::zero() {
            return DensityValue::Infinite;
        }
        let n = T::from_usize_lossy(self.index.len());
        let ell = T::from_usize_lossy(self.ell);
        let d = self.index.dim() as i32;
        let mut denom = n * radius.powi(d);
        if self.normalize_volume {
            denom = denom * unit_ball_volume::<T>(self.index.dim());
        }
        let v = ell / denom;
        if v.is_infinite() {
            DensityValue::Infinite
        } else {
            DensityValue::Finite(v)
        }
    }
}

/// Lebesgue volume of the unit Euclidean ball in ℝ^d.
pub fn unit_ball_volume<T: Scalar>(d: usize) -> T {
    let two_pi = T::from_f64_lossy(2.0 * std::f64::consts::PI);
    let mut v = if d.is_multiple_of(2) {
        T::one()
    } else {
        T::from_f64_lossy(2.0)
    };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v = v * two_pi / T::from_usize_lossy(k);
        k += 2;
    }
    v
}

/// `min(n, max(1, ⌈multiplier · ln n⌉))`.
pub fn recommended_ell(n: usize, multiplier: f64) -> usize {
    let raw = (multiplier * (n as f64).ln()).ceil();
    let raw = if raw.is_finite() && raw > 1.0 {
        raw as usize
    } else {
        1
    };
    raw.clamp(1, n.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbors::PointCloud;
    use approx::assert_relative_eq;

    fn estimator(values: &[f64], ell: usize) -> DensityEstimator<f64> {
        let idx = NeighborIndex::build(PointCloud::from_values(values).unwrap()).unwrap();
        DensityEstimator::new(Arc::new(idx), ell).unwrap()
    }

    #[test]
    fn line_example() {
        let est = estimator(&[0.0, 1.0, 2.0, 3.0], 2);
        assert_eq!(est.estimate(&[0.0]).unwrap(), DensityValue::Finite(0.5));
    }

    #[test]
    fn duplicates_give_infinite() {
        let est = estimator(&[1.0, 1.0, 1.0, 4.0], 3);
        assert!(est.estimate(&[1.0]).unwrap().is_infinite());
        assert_eq!(est.estimate(&[1.0]).unwrap().value(), f64::INFINITY);
        assert!(!estimator(&[1.0, 1.0, 1.0, 4.0], 4)
            .estimate(&[1.0])
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn ell_range() {
        let idx =
            Arc::new(NeighborIndex::build(PointCloud::from_values(&[0.0, 1.0]).unwrap()).unwrap());
        assert!(DensityEstimator::new(idx.clone(), 0).is_err());
        assert!(DensityEstimator::new(idx, 3).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let est = estimator(&[0.0, 1.0], 1);
        assert!(matches!(
            est.estimate(&[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume::<f64>(1), 2.0);
        assert_relative_eq!(unit_ball_volume::<f64>(2), std::f64::consts::PI);
        assert_relative_eq!(
            unit_ball_volume::<f64>(3),
            4.0 / 3.0 * std::f64::consts::PI,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            unit_ball_volume::<f64>(4),
            std::f64::consts::PI.powi(2) / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn normalized_volume_divides_by_two_in_1d() {
        let est = estimator(&[0.0, 1.0, 2.0, 3.0], 2).with_normalized_volume(true);
        assert_eq!(est.estimate(&[0.0]).unwrap(), DensityValue::Finite(0.25));
    }

    #[test]
    fn recommended_ell_examples() {
        assert_eq!(recommended_ell(8, 1.0), 3); // ln 8 = 2.079
        assert_eq!(recommended_ell(7, 1.0), 2); // ln 7 = 1.946
        assert_eq!(recommended_ell(1024, 3.0), 21);
        assert_eq!(recommended_ell(10, 1e6), 10);
        assert_eq!(recommended_ell(2, 0.1), 1);
    }
}
