//! Majorisation relations between real vectors, the soft-plus sum `Φ`, and
//! compound matrices.
//!
//! Notation: `y ≺_w x` when every top-`k` partial sum of `y` is dominated by
//! that of `x`; `y ≺ x` adds equality of the totals. The logarithmic variants
//! compare partial products of non-negative vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant, Matrix};
use crate::scalar::Real;

/// Default tolerance on (normalised) margins.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealVector<T = f64> {
    values: Vec<T>,
}

impl<T: Real> RealVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidShape("empty vector".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The entries in non-ascending order.
    pub fn sort_desc(&self) -> Self {
        let mut values = self.values.clone();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Self { values }
    }
}

impl<T: Real> TryFrom<Vec<T>> for RealVector<T> {
    type Error = Error;
    fn try_from(values: Vec<T>) -> Result<Self> {
        Self::new(values)
    }
}

/// Outcome of a majorisation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorisationVerdict<T = f64> {
    pub relation_holds: bool,
    /// Smallest slack over all compared partial sums (negative means
    /// violated); see the individual tests for the normalisation.
    pub worst_margin: T,
    /// 1-based `k` of the worst slack when the relation fails.
    pub violating_k: Option<usize>,
}

impl<T: Real> MajorisationVerdict<T> {
    fn from_margins(margins: &[T], tol: T) -> Self {
        let (k, worst) = margins.iter().enumerate().fold(
            (0, T::infinity()),
            |(bk, bm), (k, &m)| if m < bm { (k, m) } else { (bk, bm) },
        );
        let relation_holds = worst >= -tol;
        Self {
            relation_holds,
            worst_margin: worst,
            violating_k: (!relation_holds).then_some(k + 1),
        }
    }
}

pub fn sort_desc<T: Real>(x: &RealVector<T>) -> RealVector<T> {
    x.sort_desc()
}

fn same_len<T>(x: &RealVector<T>, y: &RealVector<T>) -> Result<()> {
    if x.values.len() != y.values.len() {
        return Err(Error::LengthMismatch {
            left: x.values.len(),
            right: y.values.len(),
        });
    }
    Ok(())
}

/// Per-`k` slacks `(Σᵢ≤ₖ x↓ᵢ − Σᵢ≤ₖ y↓ᵢ) / (1 + |Σᵢ≤ₖ x↓ᵢ|)`.
fn partial_sum_margins<T: Real>(x: &RealVector<T>, y: &RealVector<T>) -> (Vec<T>, T, T) {
    let xs = x.sort_desc();
    let ys = y.sort_desc();
    let (mut sx, mut sy) = (T::zero(), T::zero());
    let mut margins = Vec::with_capacity(xs.len());
    for (&a, &b) in xs.values.iter().zip(&ys.values) {
        sx = sx + a;
        sy = sy + b;
        margins.push((sx - sy) / (T::one() + sx.abs()));
    }
    (margins, sx, sy)
}

/// Does `x` weakly majorise `y` (`y ≺_w x`)?
///
/// Margins are normalised by `1 + |partial sum of x↓|`.
pub fn weakly_majorises<T: Real>(x: &RealVector<T>, y: &RealVector<T>, tol: T) -> Result<MajorisationVerdict<T>> {
    same_len(x, y)?;
    let (margins, _, _) = partial_sum_margins(x, y);
    Ok(MajorisationVerdict::from_margins(&margins, tol))
}

/// Does `x` majorise `y` (`y ≺ x`)? Weak majorisation plus equal totals.
pub fn majorises<T: Real>(x: &RealVector<T>, y: &RealVector<T>, tol: T) -> Result<MajorisationVerdict<T>> {
    same_len(x, y)?;
    let (mut margins, sx, sy) = partial_sum_margins(x, y);
    let total = -(sx - sy).abs() / (T::one() + sx.abs());
    // the last partial sum is replaced by the two-sided equality clause
    *margins.last_mut().unwrap() = margins.last().unwrap().min(total);
    Ok(MajorisationVerdict::from_margins(&margins, tol))
}

/// Does `x` log-majorise `y` (`y ≺_log x`, or `y ≺_{w,log} x` when `weak`)?
///
/// With all entries positive the margins are differences of partial sums of
/// logarithms (relative error of the partial products). If any entry is zero
/// the partial products are compared directly, each margin divided by the
/// larger of the two products.
pub fn log_majorises<T: Real>(
    x: &RealVector<T>,
    y: &RealVector<T>,
    tol: T,
    weak: bool,
) -> Result<MajorisationVerdict<T>> {
    same_len(x, y)?;
    for v in [x, y] {
        if let Some(index) = v.values.iter().position(|&e| e < T::zero()) {
            return Err(Error::NegativeEntry {
                index,
                value: v.values[index].to_f64().unwrap(),
            });
        }
    }
    let xs = x.sort_desc();
    let ys = y.sort_desc();
    let positive = xs.values.iter().chain(&ys.values).all(|&e| e > T::zero());
    let mut margins = Vec::with_capacity(xs.len());
    let last_gap;
    if positive {
        let (mut lx, mut ly) = (T::zero(), T::zero());
        for (&a, &b) in xs.values.iter().zip(&ys.values) {
            lx = lx + a.ln();
            ly = ly + b.ln();
            margins.push(lx - ly);
        }
        last_gap = -(lx - ly).abs();
    } else {
        let (mut px, mut py) = (T::one(), T::one());
        let rel = |a: T, b: T| {
            let s = a.abs().max(b.abs());
            if s == T::zero() {
                T::zero()
            } else {
                (a - b) / s
            }
        };
        for (&a, &b) in xs.values.iter().zip(&ys.values) {
            px = px * a;
            py = py * b;
            margins.push(rel(px, py));
        }
        last_gap = -rel(px, py).abs();
    }
    if !weak {
        let last = margins.last_mut().unwrap();
        *last = last.min(last_gap);
    }
    Ok(MajorisationVerdict::from_margins(&margins, tol))
}

/// `log(1 + eˣ)` without overflow.
pub fn softplus<T: Real>(x: T) -> T {
    if x > T::lit(30.0) {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `Φ(x) = Σᵢ log(1 + exp(xᵢ))`.
pub fn phi_isotone<T: Real>(x: &RealVector<T>) -> T {
    x.values.iter().map(|&v| softplus(v)).sum()
}

/// `∂Φ/∂xᵢ = 1 / (1 + exp(−xᵢ))`.
pub fn phi_gradient<T: Real>(x: &RealVector<T>) -> Vec<T> {
    x.values
        .iter()
        .map(|&v| {
            if v >= T::zero() {
                T::one() / (T::one() + (-v).exp())
            } else {
                let e = v.exp();
                e / (T::one() + e)
            }
        })
        .collect()
}

/// T-transform: replaces `(xᵢ, xⱼ)` by `(t·xᵢ + (1−t)·xⱼ, (1−t)·xᵢ + t·xⱼ)`.
/// For `t ∈ [0, 1]` the result is majorised by `x`.
pub fn pinch<T: Real>(x: &[T], i: usize, j: usize, t: T) -> Vec<T> {
    let mut y = x.to_vec();
    let s = T::one() - t;
    y[i] = t * x[i] + s * x[j];
    y[j] = s * x[i] + t * x[j];
    y
}

/// Lexicographically ordered `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `k`-th compound matrix `A^∧k`: the `C(n,k)×C(n,k)` matrix of `k×k` minors,
/// rows and columns indexed by lexicographically ordered index subsets.
pub fn compound_matrix<T: Real>(a: &Matrix<T>, k: usize) -> Result<Matrix<T>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidOrder { k, dim: n });
    }
    let sets = subsets(n, k);
    let m = sets.len();
    let mut entries = Vec::with_capacity(m * m);
    for rows in &sets {
        for cols in &sets {
            let minor = Matrix::from_fn(k, |i, j| a[(rows[i], cols[j])]);
            entries.push(determinant(&minor));
        }
    }
    Matrix::from_row_major(m, entries)
}
