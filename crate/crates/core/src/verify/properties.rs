//! Per-trial sampling and evaluation of each property.
//!
//! A trial is split into [`sample`], which draws the inputs into a
//! [`Witness`], and [`evaluate`], a deterministic function of the witness
//! that returns a margin. Margins are normalised so the property holds iff
//! `margin ≥ −tolerance`. Storing the witness of the worst trial is then
//! enough to reproduce its margin exactly.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::linalg::{determinant, eig_sym, pow_psd, Matrix, SymMatrix};
use crate::majorisation::{compound_matrix, majorises, phi_gradient, phi_isotone, pinch, softplus, RealVector};
use crate::means::{
    block_matrix, geometric_mean, geometric_mean_direct, naive_geometric_mean, naive_mean_spectrum, GeoMeanConfig,
};
use crate::metrics::{distance, procrustes_roots, Geodesic, GeodesicSpec, MetricKind};

/// The properties checked by the verification campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropertyId {
    /// `det(Q₁ + UᵀQ₂) ≤ det(Q₁ + Q₂)`.
    MainTheorem,
    /// `det(Q₁ + UᵀQ₂) ≥ 0`, with `det(Q₁² + |Q₂Q₁|) ≥ 0` and the identity
    /// linking the two.
    MainTheoremRealness,
    /// `det(I + A#B) ≤ det(I + √A·√B)` and its trace-log form.
    DetGeoMean,
    /// Equality in [`PropertyId::DetGeoMean`] for commuting pairs.
    DetGeoMeanCommuting,
    /// `λ(A#B) ≺_log λ(√A·√B)`, with both products equal to `√(det A·det B)`.
    LogMajoLemma,
    /// `λ₁(A#B) ≤ λ₁(√A·√B)`.
    LargestEigLemma,
    /// `A#B ≤ I ⇒ A^r#B^r ≤ I` for `r ∈ {2, 3}`.
    HiaiLemma,
    /// `B₁ ≤ B₂ ⇒ A#B₁ ≤ A#B₂`.
    Monotonicity,
    /// `[[A, A#B], [A#B, B]] ≥ 0`, and no longer so after adding `δI` to `A#B`.
    BlockMaximality,
    /// `(aA)#(bB) = √(ab)·(A#B)`.
    ScalingIdentity,
    /// `A#B = B#A`, each side inverting its first argument.
    MeanSymmetry,
    /// `det(A#B) = det(√A·√B) = √(det A·det B)`.
    CauchyBinetDet,
    /// `det D_S(p) ≤ det D_H(p)` on `p ∈ [0, 1]`.
    SwellOrdering,
    /// Both signs of `det D_S(p) − det D_H(p)` occur for some `p ∉ [0, 1]`.
    ExtrapolationSearch,
    /// Schur isotony of `Φ(x) = Σ log(1 + eˣⁱ)`.
    PhiIsotone,
    /// Weyl product identity and compatibility of compounds with products
    /// and with the geometric mean.
    WeylCompound,
    /// The Procrustes distance is the minimum over orthogonal alignments and
    /// lies below the Cholesky and Euclidean-root distances.
    ProcrustesMinimality,
}

impl PropertyId {
    pub const ALL: [PropertyId; 17] = [
        Self::MainTheorem,
        Self::MainTheoremRealness,
        Self::DetGeoMean,
        Self::DetGeoMeanCommuting,
        Self::LogMajoLemma,
        Self::LargestEigLemma,
        Self::HiaiLemma,
        Self::Monotonicity,
        Self::BlockMaximality,
        Self::ScalingIdentity,
        Self::MeanSymmetry,
        Self::CauchyBinetDet,
        Self::SwellOrdering,
        Self::ExtrapolationSearch,
        Self::PhiIsotone,
        Self::WeylCompound,
        Self::ProcrustesMinimality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MainTheorem => "MainTheorem",
            Self::MainTheoremRealness => "MainTheoremRealness",
            Self::DetGeoMean => "DetGeoMean",
            Self::DetGeoMeanCommuting => "DetGeoMeanCommuting",
            Self::LogMajoLemma => "LogMajoLemma",
            Self::LargestEigLemma => "LargestEigLemma",
            Self::HiaiLemma => "HiaiLemma",
            Self::Monotonicity => "Monotonicity",
            Self::BlockMaximality => "BlockMaximality",
            Self::ScalingIdentity => "ScalingIdentity",
            Self::MeanSymmetry => "MeanSymmetry",
            Self::CauchyBinetDet => "CauchyBinetDet",
            Self::SwellOrdering => "SwellOrdering",
            Self::ExtrapolationSearch => "ExtrapolationSearch",
            Self::PhiIsotone => "PhiIsotone",
            Self::WeylCompound => "WeylCompound",
            Self::ProcrustesMinimality => "ProcrustesMinimality",
        }
    }

    /// Failure threshold on the normalised margin.
    pub fn tolerance(self) -> f64 {
        match self {
            Self::MainTheorem
            | Self::MainTheoremRealness
            | Self::DetGeoMean
            | Self::DetGeoMeanCommuting
            | Self::LargestEigLemma
            | Self::SwellOrdering => 1e-9,
            Self::LogMajoLemma
            | Self::HiaiLemma
            | Self::Monotonicity
            | Self::BlockMaximality
            | Self::ScalingIdentity
            | Self::MeanSymmetry
            | Self::CauchyBinetDet => 1e-8,
            Self::WeylCompound => 1e-7,
            Self::PhiIsotone | Self::ProcrustesMinimality => 1e-10,
            Self::ExtrapolationSearch => 0.0,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    /// Accepts the variant name in any case, with or without `-`/`_`
    /// separators (`main-theorem`, `MainTheorem`).
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        Self::ALL
            .into_iter()
            .find(|p| p.name().to_lowercase() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown property `{s}`")))
    }
}

/// Inputs of one trial. Matrices are stored densely; `params` holds any
/// scalars the property draws besides them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub matrices: Vec<Matrix>,
    pub params: Vec<f64>,
}

impl Witness {
    fn of(matrices: Vec<SymMatrix>, params: Vec<f64>) -> Self {
        Self {
            matrices: matrices.into_iter().map(SymMatrix::into_matrix).collect(),
            params,
        }
    }

    fn sym(&self, i: usize) -> Result<SymMatrix> {
        let m = self
            .matrices
            .get(i)
            .ok_or_else(|| Error::InvalidShape(format!("witness lacks matrix {i}")))?;
        SymMatrix::from_row_major(m.dim(), m.entries().to_vec())
    }

    fn pair(&self) -> Result<(SymMatrix, SymMatrix)> {
        Ok((self.sym(0)?, self.sym(1)?))
    }
}

const PROCRUSTES_ROTATIONS: usize = 100;
const SWELL_GRID: usize = 21;

/// Magnitude an extrapolation witness must exceed.
pub const EXTRAPOLATION_THRESHOLD: f64 = 1e-6;

/// Draws the inputs of trial `t`.
pub fn sample(id: PropertyId, spec: &EnsembleSpec, t: u64) -> Witness {
    let pair = || vec![spec.draw(t, 0), spec.draw(t, 1)];
    match id {
        PropertyId::DetGeoMeanCommuting => {
            let (a, b) = spec.commuting_pair(t);
            Witness::of(vec![a, b], vec![])
        }
        PropertyId::Monotonicity => {
            let b1 = spec.draw(t, 1);
            let b2 = &b1 + &spec.draw(t, 2);
            Witness::of(vec![spec.draw(t, 0), b1, b2], vec![])
        }
        PropertyId::ScalingIdentity => {
            let mut rng = spec.rng(t, 8);
            let mut factor = || (0.1f64.ln() + rng.random::<f64>() * (100.0f64).ln()).exp();
            let params = vec![factor(), factor()];
            Witness::of(pair(), params)
        }
        PropertyId::ProcrustesMinimality => {
            let mut rng = spec.rng(t, 8);
            let mut matrices: Vec<Matrix> = pair().into_iter().map(SymMatrix::into_matrix).collect();
            matrices.extend((0..PROCRUSTES_ROTATIONS).map(|_| spec.orthogonal(&mut rng)));
            Witness {
                matrices,
                params: vec![],
            }
        }
        PropertyId::PhiIsotone => {
            let n = spec.dim;
            let mut rng = spec.rng(t, 0);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut y = x.clone();
            for _ in 0..2 * n {
                let i = rng.random_range(0..n);
                let j = (i + rng.random_range(1..n)) % n;
                y = pinch(&y, i, j, rng.random::<f64>());
            }
            y.shuffle(&mut rng);
            Witness {
                matrices: vec![],
                params: x.into_iter().chain(y).collect(),
            }
        }
        _ => Witness::of(pair(), vec![]),
    }
}

/// Normalised margin of a witness; `None` when the trial carries no
/// information for the property (e.g. a symmetry check needing two
/// invertible arguments).
///
/// `inverted` flips the main-theorem inequality, a hook for exercising the
/// failure path.
pub fn evaluate(id: PropertyId, w: &Witness, inverted: bool) -> Result<Option<f64>> {
    let cfg = GeoMeanConfig::default();
    match id {
        PropertyId::MainTheorem => main_theorem(w, inverted).map(Some),
        PropertyId::MainTheoremRealness => realness(w).map(Some),
        PropertyId::DetGeoMean => det_geo_mean(w, &cfg).map(Some),
        PropertyId::DetGeoMeanCommuting => det_geo_mean_commuting(w, &cfg).map(Some),
        PropertyId::LogMajoLemma => log_majo(w, &cfg).map(Some),
        PropertyId::LargestEigLemma => largest_eig(w, &cfg).map(Some),
        PropertyId::HiaiLemma => hiai(w, &cfg),
        PropertyId::Monotonicity => monotonicity(w, &cfg),
        PropertyId::BlockMaximality => block_maximality(w, &cfg).map(Some),
        PropertyId::ScalingIdentity => scaling(w, &cfg).map(Some),
        PropertyId::MeanSymmetry => symmetry(w),
        PropertyId::CauchyBinetDet => cauchy_binet(w, &cfg).map(Some),
        PropertyId::SwellOrdering => swell(w).map(Some),
        PropertyId::ExtrapolationSearch => {
            let p = *w
                .params
                .first()
                .ok_or_else(|| Error::InvalidShape("extrapolation witness lacks p".into()))?;
            let (diff, _) = extrapolation_difference(&Geodesics::new(w)?, p)?;
            Ok(Some(diff.abs() - EXTRAPOLATION_THRESHOLD))
        }
        PropertyId::PhiIsotone => phi(w).map(Some),
        PropertyId::WeylCompound => weyl(w, &cfg).map(Some),
        PropertyId::ProcrustesMinimality => procrustes(w).map(Some),
    }
}

/// Relative gap `|a − t|/|t|`, measured against `scale` when `t` is zero.
fn rel_gap(a: f64, t: f64, scale: f64) -> f64 {
    let d = (a - t).abs();
    if d == 0.0 {
        0.0
    } else if t != 0.0 {
        d / t.abs()
    } else {
        d / scale
    }
}

fn norm_gap(diff: f64, scale: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Spectrum with rounding-level entries (relative to the largest) set to 0.
fn clean(mut v: Vec<f64>) -> Vec<f64> {
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-12 * top;
    for x in &mut v {
        if *x <= floor {
            *x = 0.0;
        }
    }
    v
}

fn spectrum(a: &SymMatrix) -> Result<Vec<f64>> {
    Ok(clean(eig_sym(a)?.eigenvalues))
}

fn lambda_max(a: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(a)?.max())
}

/// `(‖Q₁‖ + ‖Q₂‖)/√n`, the typical eigenvalue size of the root factors.
fn root_scale(q1: &SymMatrix, q2: &SymMatrix) -> f64 {
    (q1.frobenius_norm() + q2.frobenius_norm()) / (q1.dim() as f64).sqrt()
}

struct MainParts {
    lhs: f64,
    rhs: f64,
    abs: f64,
}

fn main_parts(w: &Witness) -> Result<(MainParts, SymMatrix, SymMatrix, Matrix)> {
    let (d1, d2) = w.pair()?;
    let (q1, q2, u) = procrustes_roots(&d1, &d2)?;
    let n = d1.dim() as i32;
    let aligned = &q1.as_matrix() + &u.transpose().matmul(&q2.as_matrix());
    let parts = MainParts {
        lhs: determinant(&aligned),
        rhs: determinant(&(&q1 + &q2).into_matrix()),
        abs: root_scale(&q1, &q2).powi(n),
    };
    Ok((parts, q1, q2, u))
}

fn main_theorem(w: &Witness, inverted: bool) -> Result<f64> {
    let (MainParts { lhs, rhs, abs }, ..) = main_parts(w)?;
    if abs == 0.0 {
        return Ok(0.0);
    }
    // holds iff lhs ≤ rhs·(1 + tol) + 0.1·tol·abs, with tol = 1e-9
    let ordered = if inverted {
        (lhs - rhs) / (lhs.abs() + 0.1 * abs)
    } else {
        (rhs - lhs) / (rhs.abs() + 0.1 * abs)
    };
    // non-negativity at 1e-10·abs, rescaled onto the 1e-9 threshold
    let nonneg = 10.0 * lhs / abs;
    Ok(ordered.min(nonneg))
}

fn realness(w: &Witness) -> Result<f64> {
    let (MainParts { lhs, abs, .. }, q1, q2, _) = main_parts(w)?;
    if abs == 0.0 {
        return Ok(0.0);
    }
    let q1m = q1.as_matrix();
    let modulus = crate::linalg::polar(&q2.matmul(&q1m))?.modulus;
    let inner = determinant(&(&q1m.matmul(&q1m) + &modulus.into_matrix()));
    let abs2 = abs * abs;
    // (Q₁ + UᵀQ₂)·Q₁ = Q₁² + |Q₂Q₁|
    let identity = (lhs * determinant(&q1m) - inner).abs();
    Ok((10.0 * lhs / abs)
        .min(10.0 * inner / abs2)
        .min(-10.0 * norm_gap(identity, abs2)))
}

fn log1p_trace(v: &[f64]) -> f64 {
    v.iter().map(|&x| x.max(0.0).ln_1p()).sum()
}

fn det_sides(a: &SymMatrix, b: &SymMatrix, cfg: &GeoMeanConfig) -> Result<(f64, f64, SymMatrix)> {
    let n = a.dim();
    let m = geometric_mean(a, b, cfg)?;
    let lhs = determinant(&m.shift_diagonal(1.0).into_matrix());
    let rhs = determinant(&(&naive_geometric_mean(a, b)? + &Matrix::identity(n)));
    Ok((lhs, rhs, m))
}

fn det_geo_mean(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (lhs, rhs, m) = det_sides(&a, &b, cfg)?;
    let ordered = (rhs - lhs) / rhs.abs();
    let trace_log = log1p_trace(&naive_mean_spectrum(&a, &b)?) - log1p_trace(&spectrum(&m)?);
    // the trace-log form is held to 1e-8 absolute
    Ok(ordered.min(0.1 * trace_log))
}

fn det_geo_mean_commuting(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (lhs, rhs, _) = det_sides(&a, &b, cfg)?;
    Ok(-rel_gap(lhs, rhs, 1.0))
}

/// Cleaned spectra `x = λ(√A√B)` and `y = λ(A#B)` with `A#B`.
fn mean_spectra(a: &SymMatrix, b: &SymMatrix, cfg: &GeoMeanConfig) -> Result<(Vec<f64>, Vec<f64>, SymMatrix)> {
    let m = geometric_mean(a, b, cfg)?;
    Ok((clean(naive_mean_spectrum(a, b)?), spectrum(&m)?, m))
}

/// `(√(det A·det B), (√(λ_max(A)·λ_max(B)))ⁿ)`, the determinant taken as 0
/// when either spectrum has a rounding-level eigenvalue.
fn det_target(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, f64)> {
    let (sa, sb) = (spectrum(a)?, spectrum(b)?);
    let n = a.dim() as i32;
    let scale = (sa[0] * sb[0]).sqrt().powi(n);
    let singular = sa.iter().chain(&sb).any(|&x| x == 0.0);
    let target = if singular {
        0.0
    } else {
        (determinant(&a.as_matrix()) * determinant(&b.as_matrix())).sqrt()
    };
    Ok((target, scale))
}

/// Margin of `a ≥ b` under `tol_rel` with an absolute allowance of
/// `tol_rel/100` of `scale`: `(a − b)/(max(|a|, |b|) + scale/100)`.
fn slack(a: f64, b: f64, scale: f64) -> f64 {
    norm_gap(a - b, a.abs().max(b.abs()) + 0.01 * scale)
}

fn log_majo(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (x, y, _) = mean_spectra(&a, &b, cfg)?;
    let (target, scale) = det_target(&a, &b)?;
    let s = scale.powf(1.0 / a.dim() as f64);
    let (mut px, mut py) = (1.0, 1.0);
    let mut worst = f64::INFINITY;
    let mut sk = 1.0;
    for (&xi, &yi) in x.iter().zip(&y) {
        px *= xi;
        py *= yi;
        sk *= s;
        worst = worst.min(slack(px, py, sk));
    }
    let totals = [px, py].map(|p| -slack(p, target, scale).abs());
    Ok(worst.min(totals[0]).min(totals[1]))
}

fn largest_eig(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (x, y, _) = mean_spectra(&a, &b, cfg)?;
    let (_, scale) = det_target(&a, &b)?;
    // the 1e-9 threshold needs a 1e-10 absolute allowance, a tenth of it
    Ok(norm_gap(x[0] - y[0], x[0] + 0.1 * scale.powf(1.0 / a.dim() as f64)))
}

fn hiai(w: &Witness, cfg: &GeoMeanConfig) -> Result<Option<f64>> {
    let (a, b) = w.pair()?;
    let c = lambda_max(&geometric_mean(&a, &b, cfg)?)?;
    if c <= 0.0 {
        return Ok(None);
    }
    // rescaled so that λ_max(A#B) = 1
    let (a, b) = (a.scale(1.0 / c), b.scale(1.0 / c));
    let mut worst = f64::INFINITY;
    for r in [2.0, 3.0] {
        let powered = geometric_mean(&pow_psd(&a, r)?, &pow_psd(&b, r)?, cfg)?;
        worst = worst.min(1.0 - lambda_max(&powered)?);
    }
    Ok(Some(worst))
}

fn monotonicity(w: &Witness, cfg: &GeoMeanConfig) -> Result<Option<f64>> {
    let (a, b1, b2) = (w.sym(0)?, w.sym(1)?, w.sym(2)?);
    let m1 = geometric_mean(&a, &b1, cfg)?;
    let m2 = geometric_mean(&a, &b2, cfg)?;
    let scale = lambda_max(&m2)?;
    if scale <= 0.0 {
        return Ok(None);
    }
    Ok(Some(eig_sym(&(&m2 - &m1))?.min() / scale))
}

fn block_maximality(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let x = geometric_mean(&a, &b, cfg)?;
    let e = eig_sym(&block_matrix(&a, &b, &x)?)?;
    let psd = e.min() / e.max().max(1.0);
    let top = lambda_max(&x)?;
    if top <= 0.0 {
        return Ok(psd);
    }
    let e = eig_sym(&block_matrix(&a, &b, &x.shift_diagonal(0.01 * top))?)?;
    // enlarging the mean must leave the cone by more than the tolerance
    let broken = -e.min() / e.max() - 2.0 * PropertyId::BlockMaximality.tolerance();
    Ok(psd.min(broken))
}

fn scaling(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (s, t) = match w.params[..] {
        [s, t] => (s, t),
        _ => return Err(Error::InvalidShape("scaling witness needs two factors".into())),
    };
    let lhs = geometric_mean(&a.scale(s), &b.scale(t), cfg)?;
    let rhs = geometric_mean(&a, &b, cfg)?.scale((s * t).sqrt());
    Ok(-norm_gap((&lhs - &rhs).frobenius_norm(), rhs.frobenius_norm()))
}

fn symmetry(w: &Witness) -> Result<Option<f64>> {
    let (a, b) = w.pair()?;
    let (ab, ba) = match (geometric_mean_direct(&a, &b), geometric_mean_direct(&b, &a)) {
        (Ok(ab), Ok(ba)) => (ab, ba),
        (Err(Error::SingularInput { .. }), _) | (_, Err(Error::SingularInput { .. })) => return Ok(None),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(Some(-(&ab - &ba).frobenius_norm() / (1.0 + ab.frobenius_norm())))
}

fn cauchy_binet(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let (target, scale) = det_target(&a, &b)?;
    let mean = determinant(&geometric_mean(&a, &b, cfg)?.into_matrix());
    let naive = determinant(&naive_geometric_mean(&a, &b)?);
    Ok(-slack(mean, target, scale).abs().max(slack(naive, target, scale).abs()))
}

struct Geodesics {
    procrustes: Geodesic,
    root: Geodesic,
    abs: f64,
}

impl Geodesics {
    fn new(w: &Witness) -> Result<Self> {
        let (d1, d2) = w.pair()?;
        let path = |metric| -> Result<Geodesic> { Geodesic::new(&GeodesicSpec::new(metric, d1.clone(), d2.clone())?) };
        let root = path(MetricKind::EuclideanRoot)?;
        let (s1, s2) = (
            root.factor(1.0).expect("root path"),
            root.factor(0.0).expect("root path"),
        );
        let n = d1.dim() as f64;
        let s = (s1.frobenius_norm() + s2.frobenius_norm()) / n.sqrt();
        Ok(Self {
            procrustes: path(MetricKind::Procrustes)?,
            root,
            abs: s.powf(2.0 * n),
        })
    }
}

/// `det D_S(p) − det D_H(p)` and the rounding threshold it must exceed to
/// count as a strict sign.
fn extrapolation_difference(g: &Geodesics, p: f64) -> Result<(f64, f64)> {
    let ds = g.procrustes.determinant(p)?;
    let dh = g.root.determinant(p)?;
    Ok((ds - dh, 1e-9 * ds.abs().max(dh.abs()) + 1e-10 * g.abs))
}

fn swell(w: &Witness) -> Result<f64> {
    let g = Geodesics::new(w)?;
    let mut worst = f64::INFINITY;
    for k in 0..SWELL_GRID {
        let p = k as f64 / (SWELL_GRID - 1) as f64;
        let ds = g.procrustes.determinant(p)?;
        let dh = g.root.determinant(p)?;
        worst = worst.min(norm_gap(dh - ds, dh.abs() + 0.1 * g.abs));
    }
    Ok(worst)
}

/// Signed differences at each `p` for trial `w`, paired with their
/// counting thresholds.
pub(crate) fn extrapolation_differences(w: &Witness, p_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let g = Geodesics::new(w)?;
    p_values.iter().map(|&p| extrapolation_difference(&g, p)).collect()
}

fn phi(w: &Witness) -> Result<f64> {
    let n = w.params.len() / 2;
    if n < 2 || w.params.len() != 2 * n {
        return Err(Error::InvalidShape(
            "isotony witness needs two vectors of equal length".into(),
        ));
    }
    let (x, y) = w.params.split_at(n);
    let (xv, yv) = (RealVector::new(x.to_vec())?, RealVector::new(y.to_vec())?);
    // the generator's guarantee y ≺ x, rescaled from 1e-9 onto 1e-10
    let generated = 0.1 * majorises(&xv, &yv, 1e-9)?.worst_margin;
    let order = phi_isotone(&xv) - phi_isotone(&yv);
    let permuted = -(phi_isotone(&yv) - phi_isotone(&yv.sort_desc())).abs();
    let mut schur = f64::INFINITY;
    let mut gradient = 0.0f64;
    for v in [&xv, &yv] {
        let g = phi_gradient(v);
        let vals = v.values();
        for i in 0..n {
            for j in 0..n {
                schur = schur.min((vals[i] - vals[j]) * (g[i] - g[j]));
            }
            // the other terms of Φ cancel in the central difference
            let h = 1e-6;
            let fd = (softplus(vals[i] + h) - softplus(vals[i] - h)) / (2.0 * h);
            gradient = gradient.max((fd - g[i]).abs() / g[i]);
        }
    }
    // finite differences are held to 1e-6 relative
    Ok(generated.min(order).min(permuted).min(schur).min(-1e-4 * gradient))
}

fn weyl(w: &Witness, cfg: &GeoMeanConfig) -> Result<f64> {
    let (a, b) = w.pair()?;
    let n = a.dim();
    let m = geometric_mean(&a, &b, cfg)?;
    let (am, bm) = (a.as_matrix(), b.as_matrix());
    let (la, lb) = (spectrum(&a)?, spectrum(&b)?);
    let rank = |l: &[f64]| l.iter().filter(|&&x| x > 0.0).count();
    let common_rank = rank(&la).min(rank(&lb));
    let size = a.frobenius_norm() * b.frobenius_norm();
    let mut worst = 0.0f64;
    for k in 1..=n {
        let ak = compound_matrix(&am, k)?;
        let bk = compound_matrix(&bm, k)?;

        let top: f64 = la[..k].iter().product();
        worst = worst.max(rel_gap(lambda_max(&ak.symmetric_part())?, top, la[0].powi(k as i32)));

        let functorial = &compound_matrix(&am.matmul(&bm), k)? - &ak.matmul(&bk);
        worst = worst.max(norm_gap(functorial.frobenius_norm(), size.powi(k as i32)));

        // past the common rank both sides vanish, and the compounds of the
        // inputs are pure rounding noise that the mean would amplify
        if k <= common_rank {
            let of_mean = compound_matrix(&m.as_matrix(), k)?;
            let mean_of = geometric_mean(&ak.symmetric_part(), &bk.symmetric_part(), cfg)?;
            let scale = of_mean.frobenius_norm().max(1e-6 * size.sqrt().powi(k as i32));
            worst = worst.max(norm_gap((&of_mean - &mean_of.into_matrix()).frobenius_norm(), scale));
        }
    }
    Ok(-worst)
}

fn procrustes(w: &Witness) -> Result<f64> {
    let (d1, d2) = w.pair()?;
    let (q1, q2, _) = procrustes_roots(&d1, &d2)?;
    let ds = distance(MetricKind::Procrustes, &d1, &d2)?;
    let dc = distance(MetricKind::Cholesky, &d1, &d2)?;
    let dh = distance(MetricKind::EuclideanRoot, &d1, &d2)?;
    let (q1m, q2m) = (q1.as_matrix(), q2.as_matrix());
    let energy = q1.frobenius_norm().powi(2) + q2.frobenius_norm().powi(2);
    let cross = q2m.matmul(&q1m);
    let mut worst = (dc - ds).min(dh - ds);
    for r in w.matrices.get(2..).unwrap_or_default() {
        let misfit = (&q1m - &r.matmul(&q2m)).frobenius_norm();
        worst = worst.min(misfit - ds);
        // ‖Q₁ − RQ₂‖² = tr(Q₁² + Q₂²) − 2·tr(RQ₂Q₁)
        let expanded = energy - 2.0 * r.matmul(&cross).trace();
        worst = worst.min(-norm_gap(
            (misfit * misfit - expanded).abs(),
            energy.max(f64::MIN_POSITIVE),
        ));
    }
    Ok(worst)
}
