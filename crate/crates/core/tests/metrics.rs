mod common;

use common::*;
use dtgeom::linalg::{determinant, is_psd, polar, Matrix, SymMatrix};
use dtgeom::metrics::*;
use proptest::prelude::*;

fn spec(kind: MetricKind, a: &SymMatrix, b: &SymMatrix) -> GeodesicSpec {
    GeodesicSpec::new(kind, a.clone(), b.clone()).unwrap()
}

/// `|p·Q₁ + (1−p)·UᵀQ₂|²` with roots from the closed form and `U` from the
/// polar factor of `Q₂Q₁` via `X·(XᵀX)^{-1/2}`.
fn procrustes2(d1: [[f64; 2]; 2], d2: [[f64; 2]; 2], p: f64) -> [[f64; 2]; 2] {
    let (q1, q2) = (sqrt2(d1), sqrt2(d2));
    let x = mul2(q2, q1);
    let u = mul2(x, inv2(sqrt2(mul2(transpose2(x), x))));
    let s2 = mul2(transpose2(u), q2);
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = p * q1[i][j] + (1.0 - p) * s2[i][j];
        }
    }
    mul2(transpose2(s), s)
}

#[test]
fn zero_distance_between_equal_tensors() {
    let d = sym2([[2.0, 0.3], [0.3, 1.0]]);
    for kind in MetricKind::ALL {
        assert!(distance(kind, &d, &d).unwrap() < 1e-12, "{kind}");
    }
}

#[test]
fn riemannian_distance_to_scaled_identity() {
    let i = SymMatrix::identity(3);
    let e2 = i.scale(1f64.exp().powi(2));
    let d = distance(MetricKind::Riemannian, &i, &e2).unwrap();
    assert!((d - 2.0 * 3f64.sqrt()).abs() < 1e-13);
}

#[test]
fn riemannian_distance_blows_up_near_singularity() {
    let i = SymMatrix::identity(3);
    for eps in [1e-2f64, 1e-4, 1e-8] {
        let d = distance(MetricKind::Riemannian, &i, &SymMatrix::from_diagonal(&[eps, 1.0, 1.0])).unwrap();
        assert!((d - eps.ln().abs()).abs() <= 1e-9 * eps.ln().abs());
    }
    let singular = SymMatrix::from_diagonal(&[0.0, 1.0, 1.0]);
    let err = distance(MetricKind::Riemannian, &i, &singular).unwrap_err();
    assert!(matches!(err, dtgeom::Error::SingularInput { .. }));
}

#[test]
fn procrustes_spot_distance() {
    let d1 = [[1.0, 0.0], [0.0, 4.0]];
    let d2 = [[2.0, 1.0], [1.0, 2.0]];
    let ds = distance(MetricKind::Procrustes, &sym2(d1), &sym2(d2)).unwrap();
    // ‖Q₁ − UᵀQ₂‖² = tr(D₁ + D₂) − 2·tr|Q₂Q₁|
    let x = mul2(sqrt2(d2), sqrt2(d1));
    let m = sqrt2(mul2(transpose2(x), x));
    let want = (9.0 - 2.0 * (m[0][0] + m[1][1])).sqrt();
    assert!((ds - want).abs() < 1e-13);
    let dh = distance(MetricKind::EuclideanRoot, &sym2(d1), &sym2(d2)).unwrap();
    assert!(ds <= dh);
}

#[test]
fn euclidean_root_midpoint_of_commuting_pair() {
    let s = spec(
        MetricKind::EuclideanRoot,
        &SymMatrix::from_diagonal(&[4.0, 1.0]),
        &SymMatrix::from_diagonal(&[1.0, 4.0]),
    );
    let d = path_point(&s, 0.5).unwrap();
    assert!(max_diff2(&d, [[2.25, 0.0], [0.0, 2.25]]) < 1e-14);
}

#[test]
fn procrustes_path_matches_closed_form() {
    let d1 = [[2.0, 1.0], [1.0, 1.0]];
    let d2 = [[1.0, 0.0], [0.0, 4.0]];
    let s = spec(MetricKind::Procrustes, &sym2(d1), &sym2(d2));
    for p in [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
        let got = path_point(&s, p).unwrap();
        assert!(max_diff2(&got, procrustes2(d1, d2, p)) < 1e-13, "p={p}");
    }
}

#[test]
fn polar_factor_spot_value() {
    let d1 = [[2.0, 1.0], [1.0, 1.0]];
    let d2 = [[1.0, 0.0], [0.0, 4.0]];
    let u = unscaled_polar_factor(&sym2(d1), &sym2(d2)).unwrap();
    let x = to_na(&Matrix::from_rows(&mul2(sqrt2(d2), sqrt2(d1))).unwrap());
    let want = na_polar_orthogonal(&x);
    assert!(rel_err(&to_na(&u), &want) < 1e-13);
    let utx = u.transpose().matmul(&from_na(&x));
    assert!((&utx - &utx.transpose()).frobenius_norm() < 1e-13);
    assert!(is_psd(&utx.symmetric_part(), 1e-12));
    // positive rescaling of the roots leaves the factor alone
    let scaled = polar(&from_na(&(x * 0.3 * 0.7))).unwrap().orthogonal;
    assert!((&scaled - &u).frobenius_norm() < 1e-13);
}

#[test]
fn polar_factor_is_identity_for_commuting_pairs() {
    let a = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
    let b = SymMatrix::from_diagonal(&[5.0, 0.5, 2.0]);
    for (x, y) in [(&a, &a), (&a, &b)] {
        let u = unscaled_polar_factor(x, y).unwrap();
        assert!((&u - &Matrix::identity(3)).frobenius_norm() < 1e-14);
    }
}

#[test]
fn swelling_profile_boundaries() {
    let i = SymMatrix::identity(3);
    for (_, v) in swelling_profile(&spec(MetricKind::Procrustes, &i, &i), 5).unwrap() {
        assert!((v - 1.0).abs() < 1e-14);
    }
    let d1 = SymMatrix::from_diagonal(&[2.0, 1.0, 4.0]);
    let d2 = sym_from_na(&{
        let mut g = rng(1);
        sym_to_na(&random_psd(3, &mut g))
    });
    let prof = swelling_profile(&spec(MetricKind::EuclideanRoot, &d1, &d2), 11).unwrap();
    let cube = |d: &SymMatrix| determinant(&d.as_matrix()).cbrt();
    assert!((prof[0].1 - cube(&d2)).abs() < 1e-12);
    assert!((prof[10].1 - cube(&d1)).abs() < 1e-12);
    assert!(swelling_profile(&spec(MetricKind::EuclideanRoot, &d1, &d2), 1).is_err());
}

#[test]
fn euclidean_path_leaves_cone_when_extrapolated() {
    let s = spec(
        MetricKind::Euclidean,
        &SymMatrix::from_diagonal(&[1.0, 0.0]),
        &SymMatrix::from_diagonal(&[0.0, 1.0]),
    );
    assert!(path_point(&s, 0.5).is_ok());
    assert!(matches!(path_point(&s, 2.0), Err(dtgeom::Error::NotPsd { .. })));
}

#[test]
fn cholesky_path_squares_linear_factors() {
    let d1 = [[4.0, 2.0], [2.0, 5.0]];
    let d2 = [[1.0, 0.5], [0.5, 2.0]];
    // upper factors by hand: [[a, b], [0, c]] with a² = d₁₁, ab = d₁₂, b² + c² = d₂₂
    let upper = |d: [[f64; 2]; 2]| {
        let a = d[0][0].sqrt();
        let b = d[0][1] / a;
        [[a, b], [0.0, (d[1][1] - b * b).sqrt()]]
    };
    let (s1, s2) = (upper(d1), upper(d2));
    let p = 0.3;
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = p * s1[i][j] + (1.0 - p) * s2[i][j];
        }
    }
    let got = path_point(&spec(MetricKind::Cholesky, &sym2(d1), &sym2(d2)), p).unwrap();
    assert!(max_diff2(&got, mul2(transpose2(s), s)) < 1e-14);
}

#[test]
fn riemannian_path_matches_oracle() {
    let mut g = rng(17);
    let a = random_psd(3, &mut g);
    let b = random_psd(3, &mut g);
    let p = 0.3;
    let (na, nb) = (sym_to_na(&a), sym_to_na(&b));
    let half = na_sqrt(&na);
    let inv_half = na_function(&na, |x| 1.0 / x.sqrt());
    let inner = &inv_half * nb * &inv_half;
    let want = &half * na_function(&inner, |x| x.powf(1.0 - p)) * &half;
    let got = path_point(&spec(MetricKind::Riemannian, &a, &b), p).unwrap();
    let err = rel_err(&sym_to_na(&got), &want);
    assert!(err < 1e-10, "{err}");
}

fn psd(n: usize) -> impl Strategy<Value = SymMatrix> {
    proptest::collection::vec(-2.0f64..2.0, n * n).prop_map(move |g| Matrix::from_row_major(n, g).unwrap().gram())
}

fn pair() -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
    (2usize..=5).prop_flat_map(|n| (psd(n), psd(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn endpoints_are_reproduced((a, b) in pair()) {
        for kind in [MetricKind::Euclidean, MetricKind::Cholesky, MetricKind::EuclideanRoot, MetricKind::Procrustes] {
            let s = spec(kind, &a, &b);
            let at1 = path_point(&s, 1.0).unwrap();
            let at0 = path_point(&s, 0.0).unwrap();
            prop_assert!((&at1 - &a).frobenius_norm() <= 1e-9 * (1.0 + a.frobenius_norm()), "{}", kind);
            prop_assert!((&at0 - &b).frobenius_norm() <= 1e-9 * (1.0 + b.frobenius_norm()), "{}", kind);
        }
    }

    #[test]
    fn root_paths_stay_in_the_cone((a, b) in pair()) {
        for kind in [MetricKind::EuclideanRoot, MetricKind::Procrustes] {
            let s = spec(kind, &a, &b);
            for k in -20..=30 {
                let d = path_point(&s, k as f64 / 10.0).unwrap();
                prop_assert!(is_psd(&d, 1e-10));
            }
        }
    }

    #[test]
    fn procrustes_is_shortest_root_distance((a, b) in pair()) {
        let ds = distance(MetricKind::Procrustes, &a, &b).unwrap();
        prop_assert!(ds <= distance(MetricKind::Cholesky, &a, &b).unwrap() + 1e-10);
        prop_assert!(ds <= distance(MetricKind::EuclideanRoot, &a, &b).unwrap() + 1e-10);
        let back = distance(MetricKind::Procrustes, &b, &a).unwrap();
        prop_assert!((ds - back).abs() <= 1e-10 * (1.0 + ds));
    }

    #[test]
    fn procrustes_swells_less_on_the_segment((a, b) in pair()) {
        let s = Geodesic::new(&spec(MetricKind::Procrustes, &a, &b)).unwrap();
        let h = Geodesic::new(&spec(MetricKind::EuclideanRoot, &a, &b)).unwrap();
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let (ds, dh) = (s.determinant(p).unwrap(), h.determinant(p).unwrap());
            let scale = (a.frobenius_norm() * b.frobenius_norm()).powf(a.dim() as f64 / 2.0);
            prop_assert!(ds <= dh * (1.0 + 1e-9) + 1e-10 * scale, "p={} {} > {}", p, ds, dh);
        }
    }
}
