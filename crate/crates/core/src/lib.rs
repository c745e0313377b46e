//! Geometry of positive semidefinite matrices under square-root metrics.
//!
//! The crate covers interpolation and extrapolation of covariance tensors
//! along Euclidean-root and Procrustes geodesics, the matrix geometric mean,
//! vector majorisation, and a seeded property-verification engine for the
//! determinant inequalities relating these constructions.
//!
//! The numerical core ([`linalg`], [`means`], [`metrics`], [`majorisation`])
//! is generic over [`Real`]; the aliases below fix the scalar to `f64` (the
//! default) or `f32`. The verification engine and the tensor-field codec
//! work in `f64`.

pub mod error;
pub mod field;
pub mod linalg;
pub mod majorisation;
pub mod means;
pub mod metrics;
mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type SymMatrix32 = linalg::SymMatrix<f32>;
pub type EigenDecomposition64 = linalg::EigenDecomposition<f64>;
pub type PolarDecomposition64 = linalg::PolarDecomposition<f64>;
pub type GeodesicSpec64 = metrics::GeodesicSpec<f64>;
pub type GeodesicSpec32 = metrics::GeodesicSpec<f32>;
pub type GeoMeanConfig64 = means::GeoMeanConfig<f64>;
pub type RealVector64 = majorisation::RealVector<f64>;
