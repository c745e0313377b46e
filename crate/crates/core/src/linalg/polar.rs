//! Singular value and polar decompositions of small square matrices.
//!
//! The SVD is the one-sided (Hestenes) Jacobi method: columns of `X` are
//! rotated pairwise until mutually orthogonal, and the accumulated rotations
//! form the right singular vectors.

use crate::error::{Error, Result};
use crate::linalg::eigen::MAX_SWEEPS;
use crate::linalg::{Matrix, SymMatrix};
use crate::scalar::Real;

/// `X = W·diag(σ)·Vᵀ` with `σ` non-ascending.
///
/// Columns of `left` past `rank` complete the numerically non-zero left
/// singular vectors to an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd<T = f64> {
    pub left: Matrix<T>,
    pub singular_values: Vec<T>,
    pub right: Matrix<T>,
    pub rank: usize,
}

/// `X = U·|X|` with `U` orthogonal and `|X| = (XᵀX)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition<T = f64> {
    pub orthogonal: Matrix<T>,
    pub modulus: SymMatrix<T>,
}

pub fn svd<T: Real>(x: &Matrix<T>) -> Result<Svd<T>> {
    svd_with_floor(x, T::zero())
}

/// [`svd`] with singular values at or below `rank_floor` counted as zero,
/// for inputs whose rounding error is known to exceed `n·ε·σ_max`.
pub fn svd_with_floor<T: Real>(x: &Matrix<T>, rank_floor: T) -> Result<Svd<T>> {
    let n = x.dim();
    // work on columns: cols[j] is column j of X
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| x.column(j)).collect();
    let mut vcols: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon() * T::lit(n as f64);
    // columns this small are rounding residue; rotating them against large
    // columns only regenerates residue, so they are left alone
    let negligible = (T::epsilon() * x.frobenius_norm()).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == T::zero()
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = {
                    let t = T::one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    if zeta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s);
                rotate_pair(&mut vcols, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let singular_values: Vec<T> = order.iter().map(|&k| norms[k]).collect();
    let right = Matrix::from_fn(n, |r, c| vcols[order[c]][r]);

    let cutoff = (T::epsilon() * T::lit(n as f64) * singular_values[0]).max(rank_floor);
    let mut left_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for (&k, &sigma) in order.iter().zip(&singular_values) {
        if sigma <= cutoff || sigma == T::zero() {
            break;
        }
        let w: Vec<T> = cols[k].iter().map(|&v| v / sigma).collect();
        // small singular values leave their columns slightly off-orthogonal;
        // re-orthonormalise against the dominant ones
        match orthonormalise(&w, &left_cols) {
            Some(w) => left_cols.push(w),
            None => break,
        }
    }
    let rank = left_cols.len();
    complete_basis(&mut left_cols, n);
    let left = Matrix::from_fn(n, |r, c| left_cols[c][r]);
    Ok(Svd {
        left,
        singular_values,
        right,
        rank,
    })
}

/// Polar decomposition via the SVD: `U = W·Vᵀ`, `|X| = V·diag(σ)·Vᵀ`.
///
/// When `X` is singular `U` is not unique; the null block is filled by an
/// arbitrary orthonormal completion. See [`polar_with_hint`] for a completion
/// that follows a prescribed perturbation direction.
pub fn polar<T: Real>(x: &Matrix<T>) -> Result<PolarDecomposition<T>> {
    let s = svd(x)?;
    Ok(assemble(&s, &s.left))
}

/// Polar decomposition of a possibly singular `X`, with the orthogonal factor
/// on the null space chosen as the limit of the polar factor of `X + εE`
/// for `ε → 0⁺`.
///
/// To first order the null block of `X + εE` is `ε·W₀ᵀ·E·V₀`, where `V₀` and
/// `W₀` span the right and left null spaces, so the limit uses the polar
/// factor of that compression. If the compression is itself singular, its own
/// null block is completed arbitrarily.
///
/// Singular values at or below `rank_floor` count as zero; pass the size of
/// the rounding error in `X` when it is known (zero otherwise).
pub fn polar_with_hint<T: Real>(x: &Matrix<T>, hint: &Matrix<T>, rank_floor: T) -> Result<PolarDecomposition<T>> {
    let s = svd_with_floor(x, rank_floor)?;
    let n = x.dim();
    let r = s.rank;
    if r == n {
        return Ok(assemble(&s, &s.left));
    }
    let k = n - r;
    let e_v0: Vec<Vec<T>> = (r..n).map(|c| hint.mat_vec(&s.right.column(c))).collect();
    let compressed = Matrix::from_fn(k, |i, j| {
        let w = s.left.column(r + i);
        dot(&w, &e_v0[j])
    });
    let hint_floor = T::lit(4.0 * n as f64) * T::epsilon() * hint.frobenius_norm();
    let cs = svd_with_floor(&compressed, hint_floor)?;
    let z = assemble(&cs, &cs.left).orthogonal;
    let mut left = s.left.clone();
    for row in 0..n {
        for j in 0..k {
            let mut acc = T::zero();
            for i in 0..k {
                acc = acc + s.left[(row, r + i)] * z[(i, j)];
            }
            left[(row, r + j)] = acc;
        }
    }
    Ok(assemble(&s, &left))
}

fn assemble<T: Real>(s: &Svd<T>, left: &Matrix<T>) -> PolarDecomposition<T> {
    let orthogonal = left.matmul(&s.right.transpose());
    let modulus = SymMatrix::from_spectrum(&s.right, &s.singular_values);
    PolarDecomposition { orthogonal, modulus }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn rotate_pair<T: Real>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    for (a, b) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Two passes of modified Gram-Schmidt; `None` if `v` is (numerically) in
/// the span of `basis`.
fn orthonormalise<T: Real>(v: &[T], basis: &[Vec<T>]) -> Option<Vec<T>> {
    let start = dot(v, v).sqrt();
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let p = dot(&w, b);
            for (wi, &bi) in w.iter_mut().zip(b) {
                *wi = *wi - p * bi;
            }
        }
    }
    let norm = dot(&w, &w).sqrt();
    // a column this far inside the span carries no reliable direction
    if norm == T::zero() || norm <= T::lit(1e-3) * start {
        return None;
    }
    Some(w.into_iter().map(|x| x / norm).collect())
}

/// Extends an orthonormal set to a basis of `Rⁿ`, drawing on the standard
/// basis vector with the largest residual at each step.
fn complete_basis<T: Real>(basis: &mut Vec<Vec<T>>, n: usize) {
    while basis.len() < n {
        let mut best: Option<(T, Vec<T>)> = None;
        for k in 0..n {
            let mut e = vec![T::zero(); n];
            e[k] = T::one();
            for _ in 0..2 {
                for b in basis.iter() {
                    let p = dot(&e, b);
                    for (ei, &bi) in e.iter_mut().zip(b) {
                        *ei = *ei - p * bi;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if best.as_ref().is_none_or(|(m, _)| norm > *m) {
                best = Some((norm, e));
            }
        }
        let (norm, e) = best.expect("n > 0");
        basis.push(e.into_iter().map(|x| x / norm).collect());
    }
}
