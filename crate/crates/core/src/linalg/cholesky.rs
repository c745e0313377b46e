use crate::error::Result;
use crate::linalg::{ensure_psd, spectral_function, Matrix, SymMatrix};
use crate::scalar::Real;

/// Upper-triangular `S` with non-negative diagonal and `SᵀS = A`.
///
/// `S` is the triangular factor of a Householder QR of `A^{1/2}`, so
/// `SᵀS = A^{1/2}·A^{1/2}` without forming Schur complements. For positive
/// definite `A` this is the Cholesky factor; for semidefinite input no pivot
/// is ever divided by, and a null leading column yields a zero row. Fails
/// with [`crate::Error::NotPsd`] if `A` is not PSD.
pub fn cholesky_upper<T: Real>(a: &SymMatrix<T>) -> Result<Matrix<T>> {
    let n = a.dim();
    let eig = ensure_psd(a)?;
    let mut r = spectral_function(&eig, |x| x.sqrt(), T::zero())?.into_matrix();
    for k in 0..n {
        let norm = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vv: T = v.iter().map(|&x| x * x).sum();
        if vv == T::zero() {
            continue;
        }
        for j in k..n {
            let dot: T = v.iter().enumerate().map(|(i, &vi)| vi * r[(k + i, j)]).sum();
            let f = T::lit(2.0) * dot / vv;
            for (i, &vi) in v.iter().enumerate() {
                r[(k + i, j)] = r[(k + i, j)] - f * vi;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = T::zero();
        }
        if r[(i, i)] < T::zero() {
            for j in i..n {
                r[(i, j)] = -r[(i, j)];
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn reconstructs_definite_input() {
        let a = SymMatrix::from_rows(&[[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]).unwrap();
        let s = cholesky_upper(&a).unwrap();
        for i in 0..3 {
            assert!(s[(i, i)] > 0.0);
            for j in 0..i {
                assert_eq!(s[(i, j)], 0.0);
            }
        }
        let back = s.gram();
        assert!((&back - &a).frobenius_norm() < 1e-13);
    }

    #[test]
    fn semidefinite_gets_zero_row() {
        // rank one: v vᵀ with v = (1, 2)
        let a = SymMatrix::from_rows(&[[0.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 4.0]]).unwrap();
        let s = cholesky_upper(&a).unwrap();
        assert_eq!(s.entries()[0..3], [0.0, 0.0, 0.0]);
        assert!((&s.gram() - &a).frobenius_norm() < 1e-14);
    }

    #[test]
    fn indefinite_rejected() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(cholesky_upper(&a), Err(Error::NotPsd { .. })));
    }
}
