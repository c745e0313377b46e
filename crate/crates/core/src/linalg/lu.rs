use crate::linalg::Matrix;
use crate::scalar::Real;

/// Determinant by LU factorisation with partial pivoting.
///
/// Row swaps flip the sign, so the result carries the exact sign of the
/// factorised product. An exactly zero pivot column yields 0.
pub fn determinant<T: Real>(x: &Matrix<T>) -> T {
    let n = x.dim();
    let mut a = x.entries().to_vec();
    let mut det = T::one();
    for k in 0..n {
        let mut pivot = k;
        let mut best = a[k * n + k].abs();
        for r in k + 1..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if pivot != k {
            for c in 0..n {
                a.swap(k * n + c, pivot * n + c);
            }
            det = -det;
        }
        let akk = a[k * n + k];
        det = det * akk;
        for r in k + 1..n {
            let factor = a[r * n + k] / akk;
            if factor == T::zero() {
                continue;
            }
            for c in k + 1..n {
                a[r * n + c] = a[r * n + c] - factor * a[k * n + c];
            }
        }
    }
    det
}
