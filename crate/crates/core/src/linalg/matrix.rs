use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense square matrix in row-major storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Matrix<T = f64> {
    dim: usize,
    entries: Vec<T>,
}

/// Dense real symmetric matrix in row-major storage.
///
/// The constructors symmetrise their input, so `self[(i, j)] == self[(j, i)]`
/// holds bit-for-bit.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SymMatrix<T = f64> {
    dim: usize,
    entries: Vec<T>,
}

fn check_entries<T: Real>(dim: usize, entries: &[T]) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidShape("dimension must be positive".into()));
    }
    if entries.len() != dim * dim {
        return Err(Error::InvalidShape(format!(
            "{} entries for a {dim}x{dim} matrix",
            entries.len()
        )));
    }
    if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

impl<T: Real> Matrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: Vec<T>) -> Result<Self> {
        check_entries(dim, &entries)?;
        Ok(Self { dim, entries })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidShape(format!(
                    "row of length {} in a {dim}-row matrix",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(dim, entries)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `sqrt(sum of squared entries)`, computed with scaling to avoid
    /// overflow.
    pub fn frobenius_norm(&self) -> T {
        frobenius(&self.entries)
    }

    /// Symmetric part `(X + Xᵀ) / 2`.
    pub fn symmetric_part(&self) -> SymMatrix<T> {
        SymMatrix::from_fn(self.dim, |i, j| self[(i, j)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let row = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o = *o + a * b;
                }
            }
        }
        Self { dim: n, entries: out }
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `XᵀX`, symmetric by construction.
    pub fn gram(&self) -> SymMatrix<T> {
        let n = self.dim;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self.entries[k * n + i] * self.entries[k * n + j];
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc;
            }
        }
        SymMatrix { dim: n, entries: out }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m })
    }

    /// Converts to `f64` entries.
    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x.to_f64().unwrap()).collect(),
        }
    }
}

impl<T: Real> SymMatrix<T> {
    /// Builds a symmetric matrix from row-major entries, replacing each
    /// off-diagonal pair by its average.
    pub fn from_row_major(dim: usize, entries: Vec<T>) -> Result<Self> {
        check_entries(dim, &entries)?;
        Ok(Self::from_fn(dim, |i, j| entries[i * dim + j]))
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Ok(Matrix::from_rows(rows)?.symmetric_part())
    }

    /// Symmetrises `f`: entry `(i, j)` is `(f(i, j) + f(j, i)) / 2`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let half = T::lit(0.5);
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = f(i, i);
            for j in i + 1..dim {
                let v = (f(i, j) + f(j, i)) * half;
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    /// `V·diag(values)·Vᵀ`.
    pub fn from_spectrum(vectors: &Matrix<T>, values: &[T]) -> Self {
        let n = vectors.dim();
        assert_eq!(n, values.len());
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for (k, &l) in values.iter().enumerate() {
                    acc = acc + vectors[(i, k)] * l * vectors[(j, k)];
                }
                entries[i * n + j] = acc;
                entries[j * n + i] = acc;
            }
        }
        Self { dim: n, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn as_matrix(&self) -> Matrix<T> {
        Matrix {
            dim: self.dim,
            entries: self.entries.clone(),
        }
    }

    pub fn into_matrix(self) -> Matrix<T> {
        Matrix {
            dim: self.dim,
            entries: self.entries,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self + shift·I`.
    pub fn shift_diagonal(&self, shift: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] = out.entries[i * self.dim + i] + shift;
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        frobenius(&self.entries)
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        self.as_matrix().matmul(rhs)
    }

    /// `B·self·B` for symmetric `B`, resymmetrised.
    pub fn congruence(&self, b: &SymMatrix<T>) -> SymMatrix<T> {
        let bm = b.as_matrix();
        bm.matmul(&self.as_matrix()).matmul(&bm).symmetric_part()
    }

    /// `Xᵀ·self·X` for general `X`, resymmetrised.
    pub fn congruence_by(&self, x: &Matrix<T>) -> SymMatrix<T> {
        x.transpose().matmul(&self.as_matrix()).matmul(x).symmetric_part()
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        SymMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x.to_f64().unwrap()).collect(),
        }
    }
}

fn frobenius<T: Real>(entries: &[T]) -> T {
    let max = entries
        .iter()
        .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m });
    if max == T::zero() {
        return T::zero();
    }
    let sum: T = entries.iter().map(|&x| (x / max) * (x / max)).sum();
    max * sum.sqrt()
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.entries[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.entries[i * self.dim + j]
    }
}

impl<T> Index<(usize, usize)> for SymMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.entries[i * self.dim + j]
    }
}

macro_rules! elementwise {
    ($ty:ident, $trait:ident, $method:ident, $op:tt) => {
        impl<T: Real> $trait<&$ty<T>> for &$ty<T> {
            type Output = $ty<T>;
            fn $method(self, rhs: &$ty<T>) -> $ty<T> {
                assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
                $ty {
                    dim: self.dim,
                    entries: self
                        .entries
                        .iter()
                        .zip(&rhs.entries)
                        .map(|(&a, &b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

elementwise!(Matrix, Add, add, +);
elementwise!(Matrix, Sub, sub, -);
elementwise!(SymMatrix, Add, add, +);
elementwise!(SymMatrix, Sub, sub, -);

impl<T: Real> Mul<&Matrix<T>> for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> From<SymMatrix<T>> for Matrix<T> {
    fn from(s: SymMatrix<T>) -> Self {
        s.into_matrix()
    }
}

fn fmt_rows<T: fmt::Debug>(f: &mut fmt::Formatter<'_>, dim: usize, entries: &[T]) -> fmt::Result {
    let rows: Vec<&[T]> = entries.chunks(dim.max(1)).collect();
    f.debug_list().entries(rows).finish()
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix")?;
        fmt_rows(f, self.dim, &self.entries)
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix")?;
        fmt_rows(f, self.dim, &self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_symmetrises_exactly() {
        let s = SymMatrix::from_rows(&[[1.0, 2.0], [4.0, 5.0]]).unwrap();
        assert_eq!(s[(0, 1)], 3.0);
        assert_eq!(s[(1, 0)], 3.0);
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(Matrix::<f64>::from_row_major(2, vec![1.0; 3]).is_err());
        assert!(Matrix::<f64>::from_row_major(0, vec![]).is_err());
        assert_eq!(
            SymMatrix::from_row_major(2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(Matrix::<f64>::zeros(3).frobenius_norm(), 0.0);
        assert!((Matrix::<f64>::identity(3).frobenius_norm() - 3f64.sqrt()).abs() < 1e-15);
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!((x.frobenius_norm() - 30f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matmul_and_gram() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let xx = &x * &x;
        assert_eq!(xx.entries(), &[7.0, 10.0, 15.0, 22.0]);
        let g = x.gram();
        assert_eq!(g.entries(), x.transpose().matmul(&x).entries());
    }
}
