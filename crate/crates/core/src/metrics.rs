//! Distances between covariance tensors and the geodesic paths they induce.
//!
//! The square-root metrics measure `‖S₁ − S₂‖_F` for square roots `Dᵢ = SᵢᵀSᵢ`:
//! Cholesky factors, positive square roots (Euclidean root) or the positive
//! root of `D₁` against the best rotated root of `D₂` (Procrustes). Their
//! geodesics are straight lines in root space mapped back by `S ↦ SᵀS`:
//!
//! ```text
//! D(p) = |p·S₁ + (1−p)·S₂|²
//! ```
//!
//! Weight `p` sits on the first endpoint, so `D(1) = D₁` and `D(0) = D₂`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_upper, determinant, eig_sym, ensure_psd, is_psd, polar_with_hint, spectral_function, sqrt_psd,
    EigenDecomposition, Matrix, SymMatrix,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Euclidean,
    Cholesky,
    EuclideanRoot,
    Procrustes,
    /// Affine-invariant metric, for comparison.
    Riemannian,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Euclidean,
        MetricKind::Cholesky,
        MetricKind::EuclideanRoot,
        MetricKind::Procrustes,
        MetricKind::Riemannian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Cholesky => "cholesky",
            MetricKind::EuclideanRoot => "euclidean-root",
            MetricKind::Procrustes => "procrustes",
            MetricKind::Riemannian => "riemannian",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric '{s}'")))
    }
}

/// Endpoints of a path together with the metric that shapes it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSpec<T = f64> {
    pub metric: MetricKind,
    pub endpoint_a: SymMatrix<T>,
    pub endpoint_b: SymMatrix<T>,
}

impl<T: Real> GeodesicSpec<T> {
    /// Validates that both endpoints are PSD and of equal dimension.
    pub fn new(metric: MetricKind, endpoint_a: SymMatrix<T>, endpoint_b: SymMatrix<T>) -> Result<Self> {
        if endpoint_a.dim() != endpoint_b.dim() {
            return Err(Error::DimensionMismatch {
                expected: endpoint_a.dim(),
                found: endpoint_b.dim(),
            });
        }
        ensure_psd(&endpoint_a)?;
        ensure_psd(&endpoint_b)?;
        Ok(Self {
            metric,
            endpoint_a,
            endpoint_b,
        })
    }
}

/// A path with its endpoint data precomputed, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Geodesic<T = f64> {
    metric: MetricKind,
    shape: Shape<T>,
}

#[derive(Debug, Clone)]
enum Shape<T> {
    Linear(SymMatrix<T>, SymMatrix<T>),
    /// `D(p) = |p·S₁ + (1−p)·S₂|²`
    Root(Matrix<T>, Matrix<T>),
    /// `D₁^{1/2}·C^{1−p}·D₁^{1/2}` with `C = D₁^{-1/2}·D₂·D₁^{-1/2}`
    Affine(SymMatrix<T>, EigenDecomposition<T>),
}

impl<T: Real> Geodesic<T> {
    pub fn new(spec: &GeodesicSpec<T>) -> Result<Self> {
        let (d1, d2) = (&spec.endpoint_a, &spec.endpoint_b);
        let shape = match spec.metric {
            MetricKind::Euclidean => Shape::Linear(d1.clone(), d2.clone()),
            MetricKind::Cholesky => Shape::Root(cholesky_upper(d1)?, cholesky_upper(d2)?),
            MetricKind::EuclideanRoot => Shape::Root(sqrt_psd(d1)?.into_matrix(), sqrt_psd(d2)?.into_matrix()),
            MetricKind::Procrustes => {
                let (q1, q2, u) = procrustes_roots(d1, d2)?;
                Shape::Root(q1.into_matrix(), u.transpose().matmul(&q2.into_matrix()))
            }
            MetricKind::Riemannian => {
                let (half, inner) = affine_parts(d1, d2)?;
                Shape::Affine(half, inner)
            }
        };
        Ok(Self {
            metric: spec.metric,
            shape,
        })
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    /// Root-space factor `S(p)` with `D(p) = S(p)ᵀ·S(p)`, for the three
    /// square-root metrics.
    pub fn factor(&self, p: T) -> Option<Matrix<T>> {
        match &self.shape {
            Shape::Root(s1, s2) => Some(&s1.scale(p) + &s2.scale(T::one() - p)),
            _ => None,
        }
    }

    pub fn point(&self, p: T) -> Result<SymMatrix<T>> {
        match &self.shape {
            Shape::Linear(d1, d2) => {
                let d = &d1.scale(p) + &d2.scale(T::one() - p);
                if !is_psd(&d, T::psd_tolerance()) {
                    let min = eig_sym(&d)?.min();
                    return Err(Error::NotPsd {
                        min_eigenvalue: min.to_f64().unwrap(),
                    });
                }
                Ok(d)
            }
            Shape::Root(..) => Ok(self.factor(p).expect("root shape").gram()),
            Shape::Affine(half, inner) => {
                let power = T::one() - p;
                let c = spectral_function(inner, |x| x.powf(power), inner.min())?;
                Ok(c.congruence(half))
            }
        }
    }

    /// `det D(p)`, through `det(S(p))²` where a root factor exists.
    pub fn determinant(&self, p: T) -> Result<T> {
        match self.factor(p) {
            Some(s) => {
                let d = determinant(&s);
                Ok(d * d)
            }
            None => Ok(determinant(&self.point(p)?.as_matrix())),
        }
    }
}

/// Positive roots `Q₁`, `Q₂` and the orthogonal factor `U` of `Q₂Q₁ = U·|Q₂Q₁|`.
pub fn procrustes_roots<T: Real>(
    d1: &SymMatrix<T>,
    d2: &SymMatrix<T>,
) -> Result<(SymMatrix<T>, SymMatrix<T>, Matrix<T>)> {
    let q1 = sqrt_psd(d1)?;
    let q2 = sqrt_psd(d2)?;
    let u = polar_factor_of_roots(&q1, &q2)?;
    Ok((q1, q2, u))
}

/// Orthogonal factor of `Q₂Q₁`.
///
/// When `Q₂Q₁` is singular the factor on its null space is the limit taken
/// along `Q₁ + εI`, i.e. the polar factor of `Q₂Q₁ + εQ₂` as `ε → 0⁺`.
/// Singular values of `Q₂Q₁` within the rounding error of the product,
/// `n·ε·‖Q₂‖·‖Q₁‖`, count as zero.
pub fn polar_factor_of_roots<T: Real>(q1: &SymMatrix<T>, q2: &SymMatrix<T>) -> Result<Matrix<T>> {
    let x = q2.matmul(&q1.as_matrix());
    let n = T::lit(q1.dim() as f64);
    let floor = T::lit(4.0) * n * T::epsilon() * q1.frobenius_norm() * q2.frobenius_norm();
    Ok(polar_with_hint(&x, &q2.as_matrix(), floor)?.orthogonal)
}

/// The orthogonal `U` from the polar decomposition of `Q₂Q₁`, where `Qᵢ` are
/// the positive square roots of `Dᵢ`.
///
/// Scaling `Q₁`, `Q₂` by positive weights leaves `U` unchanged, so the same
/// factor serves every interpolation weight.
pub fn unscaled_polar_factor<T: Real>(d1: &SymMatrix<T>, d2: &SymMatrix<T>) -> Result<Matrix<T>> {
    Ok(procrustes_roots(d1, d2)?.2)
}

fn affine_parts<T: Real>(d1: &SymMatrix<T>, d2: &SymMatrix<T>) -> Result<(SymMatrix<T>, EigenDecomposition<T>)> {
    let e1 = eig_sym(d1)?;
    crate::linalg::eigen::require_definite(&e1)?;
    crate::linalg::eigen::require_definite(&eig_sym(d2)?)?;
    let half = spectral_function(&e1, |x| x.sqrt(), e1.min())?;
    let inv_half = spectral_function(&e1, |x| x.sqrt().recip(), e1.min())?;
    let inner = eig_sym(&d2.congruence(&inv_half))?;
    Ok((half, inner))
}

/// Distance between two PSD tensors under `kind`.
pub fn distance<T: Real>(kind: MetricKind, d1: &SymMatrix<T>, d2: &SymMatrix<T>) -> Result<T> {
    let spec = GeodesicSpec::new(kind, d1.clone(), d2.clone())?;
    match kind {
        MetricKind::Euclidean => Ok((d1 - d2).frobenius_norm()),
        MetricKind::Riemannian => {
            let (_, inner) = affine_parts(d1, d2)?;
            let sum: T = inner.eigenvalues.iter().map(|&l| l.ln() * l.ln()).sum();
            Ok(sum.sqrt())
        }
        _ => match Geodesic::new(&spec)?.shape {
            Shape::Root(s1, s2) => Ok((&s1 - &s2).frobenius_norm()),
            _ => unreachable!("square-root metrics use root shapes"),
        },
    }
}

/// `D(p)` on the path of `spec`.
pub fn path_point<T: Real>(spec: &GeodesicSpec<T>, p: T) -> Result<SymMatrix<T>> {
    Geodesic::new(spec)?.point(p)
}

/// `(p, det(D(p))^{1/n})` at `p = k/(steps−1)` for `k = 0..steps`.
///
/// For 3×3 tensors this is the cube root used as a swelling indicator.
pub fn swelling_profile<T: Real>(spec: &GeodesicSpec<T>, steps: usize) -> Result<Vec<(T, T)>> {
    if steps < 2 {
        return Err(Error::InvalidConfig("swelling profile needs at least 2 steps".into()));
    }
    let path = Geodesic::new(spec)?;
    let root = T::one() / T::lit(spec.endpoint_a.dim() as f64);
    let last = T::lit((steps - 1) as f64);
    (0..steps)
        .map(|k| {
            let p = T::lit(k as f64) / last;
            let det = path.determinant(p)?.max(T::zero());
            Ok((p, det.powf(root)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[[f64; 2]]) -> SymMatrix {
        SymMatrix::from_rows(rows).unwrap()
    }

    fn spec(kind: MetricKind, a: &SymMatrix, b: &SymMatrix) -> GeodesicSpec {
        GeodesicSpec::new(kind, a.clone(), b.clone()).unwrap()
    }

    #[test]
    fn zero_distance_on_equal_endpoints() {
        let d = sym(&[[2.0, 1.0], [1.0, 1.0]]);
        for kind in MetricKind::ALL {
            assert!(distance(kind, &d, &d).unwrap() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn riemannian_scalar_multiple() {
        let e2 = SymMatrix::<f64>::identity(3).scale(std::f64::consts::E.powi(2));
        let d = distance(MetricKind::Riemannian, &SymMatrix::identity(3), &e2).unwrap();
        assert!((d - 2.0 * 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn riemannian_rejects_singular() {
        let s = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let err = distance(MetricKind::Riemannian, &SymMatrix::identity(2), &s).unwrap_err();
        assert!(matches!(err, Error::SingularInput { .. }));
    }

    #[test]
    fn euclidean_root_commuting_midpoint() {
        let a = SymMatrix::from_diagonal(&[4.0, 1.0]);
        let b = SymMatrix::from_diagonal(&[1.0, 4.0]);
        let m = path_point(&spec(MetricKind::EuclideanRoot, &a, &b), 0.5).unwrap();
        assert!((&m - &SymMatrix::from_diagonal(&[2.25, 2.25])).frobenius_norm() < 1e-14);
    }

    #[test]
    fn endpoints_follow_displayed_convention() {
        let a = sym(&[[2.0, 1.0], [1.0, 1.0]]);
        let b = SymMatrix::from_diagonal(&[1.0, 4.0]);
        for kind in MetricKind::ALL {
            let s = spec(kind, &a, &b);
            assert!((&path_point(&s, 1.0).unwrap() - &a).frobenius_norm() < 1e-12, "{kind}");
            assert!((&path_point(&s, 0.0).unwrap() - &b).frobenius_norm() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn euclidean_extrapolation_leaves_cone() {
        let a = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let b = SymMatrix::from_diagonal(&[0.0, 1.0]);
        let s = spec(MetricKind::Euclidean, &a, &b);
        assert!(matches!(path_point(&s, 2.0), Err(Error::NotPsd { .. })));
        // the modulus-square paths never do
        for kind in [MetricKind::EuclideanRoot, MetricKind::Procrustes, MetricKind::Cholesky] {
            let p = path_point(&spec(kind, &a, &b), 2.0).unwrap();
            assert!(is_psd(&p, 1e-10));
        }
    }

    #[test]
    fn polar_factor_is_identity_for_commuting_pairs() {
        let a = SymMatrix::from_diagonal(&[4.0, 1.0, 2.0]);
        let b = SymMatrix::from_diagonal(&[1.0, 9.0, 3.0]);
        let u = unscaled_polar_factor(&a, &b).unwrap();
        assert!((&u - &Matrix::identity(3)).frobenius_norm() < 1e-14);
        let u = unscaled_polar_factor(&a, &a).unwrap();
        assert!((&u - &Matrix::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn singular_root_uses_limit_factor() {
        // Q₂ = I, Q₁ = diag(1, 0): Q₂(Q₁ + εI) is PSD, so the limit is U = I
        let u = unscaled_polar_factor(&SymMatrix::from_diagonal(&[1.0, 0.0]), &SymMatrix::identity(2)).unwrap();
        assert!((&u - &Matrix::identity(2)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn metric_names_round_trip() {
        for kind in MetricKind::ALL {
            assert_eq!(kind.name().parse::<MetricKind>().unwrap(), kind);
        }
        assert!("bures".parse::<MetricKind>().is_err());
    }

    #[test]
    fn swelling_profile_of_identity() {
        let i = SymMatrix::<f64>::identity(3);
        let prof = swelling_profile(&spec(MetricKind::Procrustes, &i, &i), 5).unwrap();
        assert_eq!(prof.len(), 5);
        assert!(prof.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-14));
        assert!(swelling_profile(&spec(MetricKind::Procrustes, &i, &i), 1).is_err());
    }
}
