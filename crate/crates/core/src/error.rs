use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("iterative solver did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("eigenvalue {eigenvalue:e} lies outside the function domain (tolerance {tolerance:e})")]
    DomainViolation { eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is numerically singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularInput { min_eigenvalue: f64 },

    #[error("hypothesis violated: largest eigenvalue of A#B is {lambda_max:e}, must not exceed 1")]
    HypothesisViolated { lambda_max: f64 },

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative entry {value:e} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("compound order {k} is out of range for dimension {dim}")]
    InvalidOrder { k: usize, dim: usize },

    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
