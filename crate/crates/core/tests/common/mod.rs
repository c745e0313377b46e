//! Reference computations for the integration tests, built on nalgebra and
//! on closed forms for 2×2 matrices.

#![allow(dead_code)]

use dtgeom::linalg::{Matrix, SymMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_row_slice(n, n, m.entries())
}

pub fn sym_to_na(m: &SymMatrix) -> DMatrix<f64> {
    to_na(&m.as_matrix())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    let n = m.nrows();
    Matrix::from_fn(n, |i, j| m[(i, j)])
}

pub fn sym_from_na(m: &DMatrix<f64>) -> SymMatrix {
    let s = (m + m.transpose()) * 0.5;
    SymMatrix::from_fn(s.nrows(), |i, j| s[(i, j)])
}

/// `f` applied to the spectrum through nalgebra's symmetric eigensolver.
pub fn na_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let e = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| f(l.max(0.0))));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

pub fn na_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    na_function(m, f64::sqrt)
}

/// `A^{1/2}·(A^{-1/2}·B·A^{-1/2})^{1/2}·A^{1/2}` for definite `A`.
pub fn na_geometric_mean(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let half = na_sqrt(a);
    let inv_half = na_function(a, |x| 1.0 / x.sqrt());
    let inner = &inv_half * b * &inv_half;
    &half * na_sqrt(&inner) * &half
}

pub fn na_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let e = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Orthogonal factor `U` of `X = U·|X|` from nalgebra's SVD.
pub fn na_polar_orthogonal(x: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = x.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Random PSD matrix `s·GGᵀ/n` of full rank with probability 1.
pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let s: f64 = rng.random_range(0.5..2.0);
    sym_from_na(&(&g * g.transpose() * (s / n as f64)))
}

/// Random PSD matrix of the given rank.
pub fn random_psd_rank(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let g = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
    sym_from_na(&(&g * g.transpose()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym2(rows: [[f64; 2]; 2]) -> SymMatrix {
    SymMatrix::from_rows(&rows).unwrap()
}

/// Positive square root of a 2×2 PSD matrix:
/// `√M = (M + √det·I) / √(tr M + 2√det)`.
pub fn sqrt2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let s = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt();
    let t = (m[0][0] + m[1][1] + 2.0 * s).sqrt();
    [[(m[0][0] + s) / t, m[0][1] / t], [m[1][0] / t, (m[1][1] + s) / t]]
}

pub fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn transpose2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

pub fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

/// Geometric mean of 2×2 definite matrices:
/// `A#B = √(αβ)·C / √det C` with `C = A/√α + B/√β`, `α = det A`, `β = det B`.
pub fn mean2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let (ra, rb) = (det2(a).sqrt(), det2(b).sqrt());
    let c = [
        [a[0][0] / ra + b[0][0] / rb, a[0][1] / ra + b[0][1] / rb],
        [a[1][0] / ra + b[1][0] / rb, a[1][1] / ra + b[1][1] / rb],
    ];
    let k = (ra * rb).sqrt() / det2(c).sqrt();
    [[k * c[0][0], k * c[0][1]], [k * c[1][0], k * c[1][1]]]
}

pub fn max_diff2(a: &SymMatrix, b: [[f64; 2]; 2]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[(i, j)] - b[i][j]).abs());
        }
    }
    d
}

pub fn max_diff2_mat(a: &Matrix, b: [[f64; 2]; 2]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[(i, j)] - b[i][j]).abs());
        }
    }
    d
}
