//! Dense real linear algebra on small square matrices.

mod cholesky;
pub mod eigen;
mod lu;
mod matrix;
pub mod polar;

pub use cholesky::cholesky_upper;
pub use eigen::{
    eig_sym, ensure_psd, inv_sqrt_pd, is_psd, log_pd, matrix_function, pow_psd, spectral_function, sqrt_psd,
    EigenDecomposition,
};
pub use lu::determinant;
pub use matrix::{Matrix, SymMatrix};
pub use polar::{polar, polar_with_hint, svd, svd_with_floor, PolarDecomposition, Svd};

use crate::scalar::Real;

/// Frobenius norm of a square matrix.
pub fn frobenius_norm<T: Real>(x: &Matrix<T>) -> T {
    x.frobenius_norm()
}
