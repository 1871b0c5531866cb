use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point coordinate type: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in a float type")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to any float type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `⌈v⌉` as an integer, saturating at `usize::MAX` and mapping NaN or
/// negative values to 0.
pub(crate) fn ceil_to_usize<T: Scalar>(v: T) -> usize {
    if v.is_nan() || v <= T::zero() {
        return 0;
    }
    v.ceil().to_usize().unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_saturates() {
        assert_eq!(ceil_to_usize(2.0_f64), 2);
        assert_eq!(ceil_to_usize(2.000001_f64), 3);
        assert_eq!(ceil_to_usize(-1.0_f64), 0);
        assert_eq!(ceil_to_usize(f64::NAN), 0);
        assert_eq!(ceil_to_usize(f64::INFINITY), usize::MAX);
        assert_eq!(ceil_to_usize(1e30_f32), usize::MAX);
    }
}
