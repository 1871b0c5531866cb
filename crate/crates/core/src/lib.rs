//! Local k-nearest-neighbour regression under covariate shift.
//!
//! The crate provides exact nearest-neighbour indexing, the ℓ-NN density
//! estimator, standard and density-adaptive ("local") k-NN regressors in one-
//! and two-sample form, analytic design distributions with diagnostics for
//! the density-ratio-exponent, mass-property and pseudo-moment conditions,
//! and a seeded Monte Carlo harness that measures empirical convergence
//! exponents.
//!
//! The geometric layer is generic over the coordinate type ([`Scalar`], i.e.
//! `f32` or `f64`); the aliases below fix it to one of them.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod neighbors;
pub mod rates;
pub mod risk;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PointCloud = neighbors::PointCloud<f64>;
pub type PointCloud32 = neighbors::PointCloud<f32>;
pub type NeighborIndex = neighbors::NeighborIndex<f64>;
pub type NeighborIndex32 = neighbors::NeighborIndex<f32>;
pub type NeighborQueryResult = neighbors::NeighborQueryResult<f64>;
pub type DensityEstimator = density::DensityEstimator<f64>;
pub type DensityEstimator32 = density::DensityEstimator<f32>;
pub type LabeledDataset = estimators::LabeledDataset<f64>;
pub type LabeledDataset32 = estimators::LabeledDataset<f32>;
pub type NeighborFunction = estimators::NeighborFunction<f64>;
pub type Regressor = estimators::Regressor<f64>;
pub type Regressor32 = estimators::Regressor<f32>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
