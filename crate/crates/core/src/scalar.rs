//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Real floating-point scalar the linear algebra is written against.
///
/// Implemented for `f32` and `f64`. The two tolerance hooks carry the
/// precision-dependent thresholds; everything else is plain `Float`.
pub trait Real: Float + FromPrimitive + Debug + Display + Sum + Default + Send + Sync + 'static {
    /// Relative off-diagonal threshold at which the Jacobi sweeps stop.
    fn jacobi_tolerance() -> Self;

    /// Relative tolerance below which an eigenvalue counts as zero.
    fn psd_tolerance() -> Self;

    /// Converts an `f64` literal. Every `Real` can represent (a rounding of)
    /// any finite `f64`, so this never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Real for f64 {
    fn jacobi_tolerance() -> Self {
        1e-14
    }
    fn psd_tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn jacobi_tolerance() -> Self {
        // 45 ulp at 1.0, the same margin over epsilon that 1e-14 gives f64
        45.0 * f32::EPSILON
    }
    fn psd_tolerance() -> Self {
        1e-5
    }
}
