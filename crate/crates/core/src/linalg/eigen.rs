//! Symmetric eigendecomposition by cyclic Jacobi rotations, and spectral
//! matrix functions built on it.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::scalar::Real;

/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 64;

/// Eigenvalues in non-ascending order together with the orthonormal
/// eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T = f64> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn max(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> T {
        *self.eigenvalues.last().unwrap()
    }

    /// `V·diag(λ)·Vᵀ`.
    pub fn reconstruct(&self) -> SymMatrix<T> {
        SymMatrix::from_spectrum(&self.eigenvectors, &self.eigenvalues)
    }

    /// Tolerance `psd_tol·max(1, λ_max)` used to decide when an eigenvalue
    /// is numerically zero.
    pub fn psd_tolerance(&self) -> T {
        T::psd_tolerance() * T::one().max(self.max())
    }

    /// Magnitude below which an eigenvalue is indistinguishable from the
    /// rounding left by the Jacobi iteration, `100·jacobi_tol·max|λ|`.
    pub fn noise_floor(&self) -> T {
        T::lit(100.0) * T::jacobi_tolerance() * self.max().abs().max(self.min().abs())
    }
}

/// Diagonalises a symmetric matrix.
///
/// Cyclic-by-row Jacobi. Iteration stops once the off-diagonal Frobenius
/// norm is below `T::jacobi_tolerance()·‖A‖_F` and, in addition, every
/// off-diagonal entry is negligible against its diagonal pair
/// (`|a_pq| ≤ ε·√|a_pp·a_qq|`); the second rule keeps small eigenvalues of
/// ill-conditioned matrices at rounding accuracy. Negligible pairs are not
/// rotated.
pub fn eig_sym<T: Real>(a: &SymMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.dim();
    let mut m = a.as_matrix();
    let mut v = Matrix::<T>::identity(n);
    let norm = a.frobenius_norm();
    let threshold = T::jacobi_tolerance() * norm;
    let eps = T::epsilon();
    let floor = eps * eps * norm;
    let negligible = |m: &Matrix<T>, p: usize, q: usize| {
        let apq = m[(p, q)].abs();
        apq <= floor || apq <= eps * (m[(p, p)] * m[(q, q)]).abs().sqrt()
    };

    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        let settled = (0..n).all(|p| (p + 1..n).all(|q| negligible(&m, p, q)));
        if settled && off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if !negligible(&m, p, q) {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the pre-sort order for ties, so the result is
    // deterministic for a given input
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm<T: Real>(m: &Matrix<T>) -> T {
    let n = m.dim();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc = acc + m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

fn rotate<T: Real>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let n = m.dim();
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * apq);
    let t = {
        let denom = theta.abs() + (theta * theta + T::one()).sqrt();
        let t = T::one() / denom;
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Applies `f` to the spectrum of a positive semidefinite matrix.
///
/// Eigenvalues below `-psd_tolerance` are a [`Error::DomainViolation`].
/// Eigenvalues inside the [noise floor](EigenDecomposition::noise_floor) are
/// taken as exactly zero, and anything below `domain_floor` is raised to it
/// before `f` is applied.
pub fn matrix_function<T: Real>(a: &SymMatrix<T>, f: impl Fn(T) -> T, domain_floor: T) -> Result<SymMatrix<T>> {
    let eig = eig_sym(a)?;
    spectral_function(&eig, f, domain_floor)
}

/// [`matrix_function`] on an existing decomposition.
pub fn spectral_function<T: Real>(
    eig: &EigenDecomposition<T>,
    f: impl Fn(T) -> T,
    domain_floor: T,
) -> Result<SymMatrix<T>> {
    let tol = eig.psd_tolerance();
    let lowest = eig.min();
    if lowest < -tol {
        return Err(Error::DomainViolation {
            eigenvalue: lowest.to_f64().unwrap(),
            tolerance: tol.to_f64().unwrap(),
        });
    }
    let noise = eig.noise_floor();
    let mapped: Vec<T> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = if l.abs() <= noise { T::zero() } else { l };
            f(if l < domain_floor { domain_floor } else { l })
        })
        .collect();
    Ok(SymMatrix::from_spectrum(&eig.eigenvectors, &mapped))
}

/// Positive square root.
pub fn sqrt_psd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    matrix_function(a, |x| x.sqrt(), T::zero())
}

/// `A^power` for a positive semidefinite `A` and `power > 0`.
pub fn pow_psd<T: Real>(a: &SymMatrix<T>, power: T) -> Result<SymMatrix<T>> {
    matrix_function(a, |x| x.powf(power), T::zero())
}

/// `A^{-1/2}`; `A` must be numerically positive definite.
pub fn inv_sqrt_pd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = eig_sym(a)?;
    require_definite(&eig)?;
    spectral_function(&eig, |x| x.sqrt().recip(), eig.min())
}

/// Matrix logarithm; `A` must be numerically positive definite.
pub fn log_pd<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = eig_sym(a)?;
    require_definite(&eig)?;
    spectral_function(&eig, |x| x.ln(), eig.min())
}

pub(crate) fn require_definite<T: Real>(eig: &EigenDecomposition<T>) -> Result<()> {
    if eig.min() <= eig.psd_tolerance() {
        return Err(Error::SingularInput {
            min_eigenvalue: eig.min().to_f64().unwrap(),
        });
    }
    Ok(())
}

/// True iff `λ_min(A) ≥ -tol·max(1, λ_max(A))`.
pub fn is_psd<T: Real>(a: &SymMatrix<T>, tol: T) -> bool {
    match eig_sym(a) {
        Ok(eig) => eig.min() >= -tol * T::one().max(eig.max()),
        Err(_) => false,
    }
}

/// Fails with [`Error::NotPsd`] unless `a` passes [`is_psd`] at the default
/// tolerance.
pub fn ensure_psd<T: Real>(a: &SymMatrix<T>) -> Result<EigenDecomposition<T>> {
    let eig = eig_sym(a)?;
    if eig.min() < -eig.psd_tolerance() {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min().to_f64().unwrap(),
        });
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sym(rows: &[[f64; 2]]) -> SymMatrix {
        SymMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_input_sorted() {
        let e = eig_sym(&SymMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        // a permutation matrix: every column has one unit entry
        for j in 0..3 {
            let col = e.eigenvectors.column(j);
            assert_eq!(col.iter().filter(|x: &&f64| x.abs() == 1.0).count(), 1);
        }
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_sym(&SymMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_by_hand() {
        // det([[2-l,1],[1,2-l]]) = (2-l)^2 - 1 = 0  =>  l = 3, 1
        let e = eig_sym(&sym(&[[2.0, 1.0], [1.0, 2.0]])).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        let r = 0.5f64.sqrt();
        let v0 = e.eigenvectors.column(0);
        let v1 = e.eigenvectors.column(1);
        assert_abs_diff_eq!((v0[0] * r + v0[1] * r).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v1[0] * r - v1[1] * r).abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[(1, 1)], 3.0, epsilon = 1e-14);
        assert_eq!(s[(0, 1)], 0.0);

        let s = sqrt_psd(&sym(&[[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let r3 = 3f64.sqrt();
        assert_abs_diff_eq!(s[(0, 0)], 0.5 * (r3 + 1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(s[(0, 1)], 0.5 * (r3 - 1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(s[(1, 1)], 0.5 * (r3 + 1.0), epsilon = 1e-14);
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = matrix_function(&SymMatrix::<f64>::identity(3), f64::ln, 1e-300).unwrap();
        assert!(l.entries().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn negative_spectrum_is_a_domain_violation() {
        let err = sqrt_psd(&SymMatrix::from_diagonal(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { .. }));
        // rounding noise on either side of zero is snapped to zero
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[1.0, -1e-14])).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[1.0, 1e-14])).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
        // small but resolvable eigenvalues are kept
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[1.0, 1e-11])).unwrap();
        assert!((s[(1, 1)] - 1e-11f64.sqrt()).abs() < 1e-18);
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&SymMatrix::<f64>::identity(3), 1e-10));
        assert!(!is_psd(&SymMatrix::from_diagonal(&[1.0, -1.0]), 1e-10));
        // eigenvalues 3 and -1
        assert!(!is_psd(&sym(&[[1.0, 2.0], [2.0, 1.0]]), 1e-10));
    }

    #[test]
    fn singular_inputs_rejected_by_definite_functions() {
        let a = SymMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(log_pd(&a), Err(Error::SingularInput { .. })));
        assert!(matches!(inv_sqrt_pd(&a), Err(Error::SingularInput { .. })));
    }

    #[test]
    fn single_precision_works() {
        let a = SymMatrix::<f32>::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = eig_sym(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-6);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-6);
    }
}
