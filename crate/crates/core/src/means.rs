//! The matrix geometric mean `A#B` and the predicates that characterise it.
//!
//! For positive definite `A`,
//!
//! ```text
//! A#B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}
//! ```
//!
//! and `A#B` is the largest PSD `X` for which `[[A, X], [X, B]]` is PSD.
//! When both arguments are singular the mean is the decreasing limit of
//! `(A+εI)#(B+εI)`. [`geometric_mean`] evaluates that limit exactly through
//! the maximality characterisation; [`geometric_mean_regularised`] walks the
//! `ε` ladder and is kept as an independent approximation.

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, ensure_psd, spectral_function, EigenDecomposition, Matrix, SymMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct GeoMeanConfig<T = f64> {
    /// Relative eigenvalue level (`λ / λ_max`) at or below which an argument
    /// counts as singular. The default is the eigenvalue noise floor
    /// `100·jacobi_tol`.
    pub regularisation_eps: T,
    /// Relative shifts for [`geometric_mean_regularised`], strictly
    /// decreasing. Each is multiplied by `1 + max(λ_max(A), λ_max(B))`.
    pub eps_ladder: Vec<T>,
}

impl<T: Real> Default for GeoMeanConfig<T> {
    fn default() -> Self {
        Self {
            regularisation_eps: T::lit(100.0) * T::jacobi_tolerance(),
            eps_ladder: vec![T::lit(1e-6), T::lit(1e-8), T::lit(1e-10)],
        }
    }
}

impl<T: Real> GeoMeanConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.regularisation_eps > T::zero()) {
            return Err(Error::InvalidConfig("regularisation_eps must be positive".into()));
        }
        if self.eps_ladder.is_empty() {
            return Err(Error::InvalidConfig("eps_ladder is empty".into()));
        }
        if self.eps_ladder.iter().any(|&e| !(e > T::zero())) {
            return Err(Error::InvalidConfig("eps_ladder entries must be positive".into()));
        }
        if self.eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("eps_ladder must be strictly decreasing".into()));
        }
        Ok(())
    }
}

/// Result of the `ε`-ladder evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularisedMean<T = f64> {
    /// `(A+εI)#(B+εI)` at the last rung.
    pub mean: SymMatrix<T>,
    /// Absolute shift used at the last rung.
    pub eps: T,
    /// Frobenius distance between the last two rungs (0 for a single rung).
    pub gap: T,
}

fn same_dim<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn conditioning<T: Real>(eig: &EigenDecomposition<T>) -> T {
    if eig.max() <= T::zero() {
        T::zero()
    } else {
        eig.min().max(T::zero()) / eig.max()
    }
}

/// `A#B` for PSD `A`, `B`.
///
/// The argument with the better relative conditioning is the one inverted
/// (the mean is symmetric). If either is singular at the configured level,
/// the limit is evaluated on `range(A) ∩ range(B)`, which keeps the result
/// exactly semidefinite of the right rank.
pub fn geometric_mean<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>, cfg: &GeoMeanConfig<T>) -> Result<SymMatrix<T>> {
    same_dim(a, b)?;
    let ea = ensure_psd(a)?;
    let eb = ensure_psd(b)?;
    let (ca, cb) = (conditioning(&ea), conditioning(&eb));
    if ca.min(cb) > cfg.regularisation_eps {
        let (e_inverted, other) = if ca >= cb { (&ea, b) } else { (&eb, a) };
        return direct_from_eig(e_inverted, other);
    }
    singular_mean(a, &ea, b, &eb, cfg.regularisation_eps)
}

/// The defining formula, inverting `A` exactly as written. `A` must have no
/// eigenvalue inside the noise floor; `B` may be singular.
pub fn geometric_mean_direct<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    same_dim(a, b)?;
    let ea = ensure_psd(a)?;
    ensure_psd(b)?;
    if ea.min() <= ea.noise_floor() {
        return Err(Error::SingularInput {
            min_eigenvalue: ea.min().to_f64().unwrap(),
        });
    }
    direct_from_eig(&ea, b)
}

/// `(A^{-1/2}·B·A^{-1/2})^{1/2}` is taken as the modulus `|B^{1/2}·A^{-1/2}|`
/// from a one-sided Jacobi SVD rather than from the eigenvalues of the inner
/// product, whose condition number is the square of the factor's.
fn direct_from_eig<T: Real>(ea: &EigenDecomposition<T>, b: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let floor = ea.min();
    let half = spectral_function(ea, |x| x.sqrt(), floor)?;
    let inv_half = spectral_function(ea, |x| x.sqrt().recip(), floor)?;
    let factor = crate::linalg::sqrt_psd(b)?.matmul(&inv_half.as_matrix());
    let root = crate::linalg::polar(&factor)?.modulus;
    Ok(root.congruence(&half))
}

/// Exact limit for two singular arguments.
///
/// A PSD `X` with `[[A, X], [X, B]] ≥ 0` has range inside
/// `M = range(A) ∩ range(B)`. With `W` an orthonormal basis of `M`, the
/// block condition reduces to `Y·C·Y ≤ S_B` for `X = W·Y·Wᵀ`, where
/// `C = Wᵀ·A⁺·W` and `S_B = (Wᵀ·B⁺·W)⁻¹` is the short of `B` to `M`. The
/// largest such `Y` is `C⁻¹ # S_B`, and `C⁻¹` is the short of `A`.
fn singular_mean<T: Real>(
    a: &SymMatrix<T>,
    ea: &EigenDecomposition<T>,
    b: &SymMatrix<T>,
    eb: &EigenDecomposition<T>,
    rel: T,
) -> Result<SymMatrix<T>> {
    let n = ea.eigenvectors.dim();
    let rank_a = numerical_rank(ea, rel);
    let rank_b = numerical_rank(eb, rel);
    if rank_a == 0 || rank_b == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let w = range_intersection(ea, rank_a, eb, rank_b)?;
    let k = w.len();
    if k == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let basis = complete_basis(&w, n)?;
    let short_a = short_to_subspace(a, ea, &basis, k, rel)?;
    let short_b = short_to_subspace(b, eb, &basis, k, rel)?;
    let cfg = GeoMeanConfig {
        regularisation_eps: rel,
        ..Default::default()
    };
    let core = geometric_mean(&short_a, &short_b, &cfg)?;
    // W·core·Wᵀ
    let embed = Matrix::from_fn(n, |r, c| if c < k { w[c][r] } else { T::zero() });
    let mut padded = vec![T::zero(); n * n];
    for i in 0..k {
        for j in 0..k {
            padded[i * n + j] = core[(i, j)];
        }
    }
    let padded = SymMatrix::from_row_major(n, padded)?;
    Ok(padded.congruence_by(&embed.transpose()))
}

fn numerical_rank<T: Real>(eig: &EigenDecomposition<T>, rel: T) -> usize {
    let cutoff = rel * eig.max();
    eig.eigenvalues.iter().take_while(|&&l| l > cutoff).count()
}

/// Orthonormal basis of `range(A) ∩ range(B)`: the eigenvectors of
/// `(P_A + P_B) / 2` with eigenvalue 1 (principal angle 0).
fn range_intersection<T: Real>(
    ea: &EigenDecomposition<T>,
    rank_a: usize,
    eb: &EigenDecomposition<T>,
    rank_b: usize,
) -> Result<Vec<Vec<T>>> {
    let n = ea.eigenvectors.dim();
    let cols =
        |e: &EigenDecomposition<T>, r: usize| -> Vec<Vec<T>> { (0..r).map(|c| e.eigenvectors.column(c)).collect() };
    if rank_a == n {
        return Ok(cols(eb, rank_b));
    }
    if rank_b == n {
        return Ok(cols(ea, rank_a));
    }
    let ones_a = vec![T::one(); rank_a];
    let ones_b = vec![T::one(); rank_b];
    let pa = projector(&cols(ea, rank_a), &ones_a, n);
    let pb = projector(&cols(eb, rank_b), &ones_b, n);
    let avg = (&pa + &pb).scale(T::lit(0.5));
    let e = eig_sym(&avg)?;
    // eigenvalue (1 + cos θ)/2 for principal angle θ; the slack only absorbs
    // rounding in the eigenvectors (θ ≲ 2e-6 in double precision)
    let cutoff = T::one() - T::lit(1e4) * T::epsilon();
    Ok(e.eigenvalues
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l >= cutoff)
        .map(|(c, _)| e.eigenvectors.column(c))
        .collect())
}

fn projector<T: Real>(basis: &[Vec<T>], weights: &[T], n: usize) -> SymMatrix<T> {
    SymMatrix::from_fn(n, |i, j| basis.iter().zip(weights).map(|(v, &w)| v[i] * w * v[j]).sum())
}

/// Orthonormal basis of the whole space whose first columns are `w`.
fn complete_basis<T: Real>(w: &[Vec<T>], n: usize) -> Result<Matrix<T>> {
    let k = w.len();
    let rest = eig_sym(&projector(w, &vec![T::one(); k], n))?;
    Ok(Matrix::from_fn(n, |r, c| {
        if c < k {
            w[c][r]
        } else {
            rest.eigenvectors[(r, c)]
        }
    }))
}

/// The shorted operator of `A` onto the span of the first `k` columns of
/// `basis`, in those coordinates.
///
/// Uses the Schur complement `A₁₁ − A₁₂·A₂₂⁺·A₂₁`, so that only the
/// compression of `A` to the complement is inverted. Going through `A⁺`
/// instead loses accuracy as soon as `A` has a small eigenvalue.
fn short_to_subspace<T: Real>(
    a: &SymMatrix<T>,
    eig: &EigenDecomposition<T>,
    basis: &Matrix<T>,
    k: usize,
    rel: T,
) -> Result<SymMatrix<T>> {
    let n = a.dim();
    let rotated = a.congruence_by(basis);
    let head = SymMatrix::from_fn(k, |i, j| rotated[(i, j)]);
    if k == n {
        return Ok(head);
    }
    let m = n - k;
    let tail = SymMatrix::from_fn(m, |i, j| rotated[(k + i, k + j)]);
    let et = eig_sym(&tail)?;
    let cutoff = rel * eig.max();
    // A₁₂·V, scaled by λ^{-1/2} on the kept part of the tail spectrum
    let kept: Vec<usize> = (0..m).filter(|&c| et.eigenvalues[c] > cutoff).collect();
    let coupling: Vec<Vec<T>> = (0..k)
        .map(|i| {
            kept.iter()
                .map(|&c| {
                    let dot: T = (0..m).map(|r| rotated[(i, k + r)] * et.eigenvectors[(r, c)]).sum();
                    dot / et.eigenvalues[c].sqrt()
                })
                .collect()
        })
        .collect();
    Ok(SymMatrix::from_fn(k, |i, j| {
        let correction: T = coupling[i].iter().zip(&coupling[j]).map(|(&x, &y)| x * y).sum();
        head[(i, j)] - correction
    }))
}

/// Walks `cfg.eps_ladder`, evaluating `(A+εI)#(B+εI)` with
/// `ε = rung·(1 + max(λ_max(A), λ_max(B)))`.
///
/// The sequence decreases in `ε` towards `A#B`; the gap between the last two
/// rungs is reported as an error estimate, not a bound. Convergence is only
/// `O(√ε)` when both arguments are singular.
pub fn geometric_mean_regularised<T: Real>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    cfg: &GeoMeanConfig<T>,
) -> Result<RegularisedMean<T>> {
    cfg.validate()?;
    same_dim(a, b)?;
    let ea = ensure_psd(a)?;
    let eb = ensure_psd(b)?;
    let scale = T::one() + ea.max().max(eb.max());
    let mut previous: Option<SymMatrix<T>> = None;
    let mut gap = T::zero();
    let mut last = None;
    for &rung in &cfg.eps_ladder {
        let eps = rung * scale;
        let m = geometric_mean_direct(&a.shift_diagonal(eps), &b.shift_diagonal(eps))?;
        if let Some(p) = &previous {
            gap = (&m - p).frobenius_norm();
        }
        previous = Some(m.clone());
        last = Some((m, eps));
    }
    let (mean, eps) = last.expect("ladder validated non-empty");
    Ok(RegularisedMean { mean, eps, gap })
}

/// `√A·√B`, the product of the positive square roots (not symmetric in
/// general).
pub fn naive_geometric_mean<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<Matrix<T>> {
    same_dim(a, b)?;
    ensure_psd(a)?;
    ensure_psd(b)?;
    let ra = crate::linalg::sqrt_psd(a)?;
    let rb = crate::linalg::sqrt_psd(b)?;
    Ok(ra.matmul(&rb.as_matrix()))
}

/// Eigenvalues of `√A·√B`, non-ascending.
///
/// `√A·√B = (A^{1/2}·B^{1/4})·B^{1/4}` has the spectrum of
/// `B^{1/4}·A^{1/2}·B^{1/4}` (`XY` and `YX` share eigenvalues), which is
/// symmetric PSD. No invertibility is needed.
pub fn naive_mean_spectrum<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> Result<Vec<T>> {
    same_dim(a, b)?;
    ensure_psd(a)?;
    ensure_psd(b)?;
    let ra = crate::linalg::sqrt_psd(a)?;
    let qb = crate::linalg::pow_psd(b, T::lit(0.25))?;
    Ok(eig_sym(&ra.congruence(&qb))?.eigenvalues)
}

/// The `2n×2n` block matrix `[[A, X], [X, B]]`.
pub fn block_matrix<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>, x: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    same_dim(a, b)?;
    same_dim(a, x)?;
    let n = a.dim();
    let m = 2 * n;
    let mut entries = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            entries[i * m + j] = a[(i, j)];
            entries[(n + i) * m + n + j] = b[(i, j)];
            entries[i * m + n + j] = x[(i, j)];
            entries[(n + i) * m + j] = x[(i, j)];
        }
    }
    SymMatrix::from_row_major(m, entries)
}

/// True iff `[[A, X], [X, B]]` is PSD within `tol` (relative to
/// `max(1, λ_max)` of the block).
pub fn check_block_maximality<T: Real>(a: &SymMatrix<T>, b: &SymMatrix<T>, x: &SymMatrix<T>, tol: T) -> Result<bool> {
    Ok(crate::linalg::is_psd(&block_matrix(a, b, x)?, tol))
}

/// Checks `A^r # B^r ≤ I` given `A#B ≤ I`.
///
/// Returns [`Error::HypothesisViolated`] when `λ_max(A#B) > 1 + tol`; rescale
/// both arguments by `1/λ_max(A#B)` first to meet the hypothesis.
pub fn check_hiai_power<T: Real>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    r: T,
    tol: T,
    cfg: &GeoMeanConfig<T>,
) -> Result<bool> {
    if r < T::one() {
        return Err(Error::InvalidConfig("Hiai exponent must be at least 1".into()));
    }
    let base = eig_sym(&geometric_mean(a, b, cfg)?)?.max();
    if base > T::one() + tol {
        return Err(Error::HypothesisViolated {
            lambda_max: base.to_f64().unwrap(),
        });
    }
    let ar = crate::linalg::pow_psd(a, r)?;
    let br = crate::linalg::pow_psd(b, r)?;
    let powered = eig_sym(&geometric_mean(&ar, &br, cfg)?)?.max();
    Ok(powered <= T::one() + tol)
}
