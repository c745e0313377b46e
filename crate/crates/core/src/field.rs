//! Regular 3-D grids of 3×3 covariance tensors and their JSON encoding.
//!
//! A field file is one object:
//!
//! ```json
//! {"dims":[nx,ny,nz],"spacing":[hx,hy,hz],"tensors":[[xx,xy,xz,yy,yz,zz], ...]}
//! ```
//!
//! with voxels in x-fastest order. A lone tensor is stored as the bare
//! six-element array.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eig_sym, SymMatrix};
use crate::metrics::{Geodesic, GeodesicSpec, MetricKind};

/// Grid position `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Voxel(pub [usize; 3]);

impl fmt::Display for Voxel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.0;
        write!(f, "({x}, {y}, {z})")
    }
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid field: {0}")]
    Validation(String),

    #[error("voxel {voxel}: {source}")]
    AtVoxel { voxel: Voxel, source: crate::Error },

    #[error(transparent)]
    Numeric(#[from] crate::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    dims: [usize; 3],
    spacing: [f64; 3],
    tensors: Vec<[f64; 6]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    dims: [usize; 3],
    spacing: [f64; 3],
    tensors: Vec<SymMatrix>,
}

/// Upper-triangular entries `xx, xy, xz, yy, yz, zz`.
pub fn to_components(t: &SymMatrix) -> [f64; 6] {
    [t[(0, 0)], t[(0, 1)], t[(0, 2)], t[(1, 1)], t[(1, 2)], t[(2, 2)]]
}

pub fn from_components(c: [f64; 6]) -> SymMatrix {
    let [xx, xy, xz, yy, yz, zz] = c;
    SymMatrix::from_rows(&[[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]).expect("3×3 rows")
}

fn check_finite(c: &[f64; 6], what: impl FnOnce() -> String) -> Result<(), FieldError> {
    match c.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(FieldError::Validation(format!(
            "non-finite component {i} in {}",
            what()
        ))),
        None => Ok(()),
    }
}

fn check_psd(t: &SymMatrix) -> Result<(), f64> {
    let eig = eig_sym(t).map_err(|_| f64::NAN)?;
    if eig.min() < -eig.psd_tolerance() {
        return Err(eig.min());
    }
    Ok(())
}

impl TensorField {
    /// Builds a field, checking the voxel count, finiteness and
    /// semidefiniteness. Every non-PSD voxel is named in the error.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], tensors: Vec<SymMatrix>) -> Result<Self, FieldError> {
        if dims.contains(&0) {
            return Err(FieldError::Validation(format!("dims {dims:?} must be positive")));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(FieldError::Validation(format!(
                "spacing {spacing:?} must be positive and finite"
            )));
        }
        let count = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| FieldError::Validation(format!("dims {dims:?} overflow")))?;
        if tensors.len() != count {
            return Err(FieldError::Validation(format!(
                "dims {dims:?} need {count} tensors, found {}",
                tensors.len()
            )));
        }
        if let Some(t) = tensors.iter().find(|t| t.dim() != 3) {
            return Err(FieldError::Validation(format!(
                "tensor of dimension {} in a 3-D field",
                t.dim()
            )));
        }
        let field = Self { dims, spacing, tensors };
        for (i, t) in field.tensors.iter().enumerate() {
            check_finite(&to_components(t), || format!("voxel {}", field.voxel(i)))?;
        }
        let bad = field.psd_violations();
        if !bad.is_empty() {
            let list: Vec<String> = bad
                .iter()
                .map(|(v, l)| format!("{v} (smallest eigenvalue {l:e})"))
                .collect();
            return Err(FieldError::Validation(format!(
                "{} tensor(s) not positive semidefinite: {}",
                bad.len(),
                list.join(", ")
            )));
        }
        Ok(field)
    }

    /// Field where every voxel holds `t`.
    pub fn constant(dims: [usize; 3], spacing: [f64; 3], t: &SymMatrix) -> Result<Self, FieldError> {
        let n = dims.iter().product();
        Self::new(dims, spacing, vec![t.clone(); n])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn tensors(&self) -> &[SymMatrix] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn index(&self, v: Voxel) -> usize {
        let [x, y, z] = v.0;
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn voxel(&self, index: usize) -> Voxel {
        let [nx, ny, _] = self.dims;
        Voxel([index % nx, (index / nx) % ny, index / (nx * ny)])
    }

    pub fn get(&self, v: Voxel) -> &SymMatrix {
        &self.tensors[self.index(v)]
    }

    /// Voxels whose smallest eigenvalue is below `-psd_tol·max(1, λ_max)`.
    pub fn psd_violations(&self) -> Vec<(Voxel, f64)> {
        self.tensors
            .iter()
            .enumerate()
            .filter_map(|(i, t)| check_psd(t).err().map(|l| (self.voxel(i), l)))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let raw: FieldFile = serde_json::from_str(text).map_err(|e| FieldError::Parse(e.to_string()))?;
        for (i, c) in raw.tensors.iter().enumerate() {
            check_finite(c, || format!("tensor {i}"))?;
        }
        let tensors = raw.tensors.into_iter().map(from_components).collect();
        Self::new(raw.dims, raw.spacing, tensors)
    }

    /// Compact JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let raw = FieldFile {
            dims: self.dims,
            spacing: self.spacing,
            tensors: self.tensors.iter().map(to_components).collect(),
        };
        let mut s = serde_json::to_string(&raw).expect("finite values serialise");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FieldError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        write(path.as_ref(), &self.to_json())
    }

    /// Inserts `factor − 1` tensors between neighbours along x, then y,
    /// then z. Each axis of length `n > 1` becomes `factor·(n−1)+1` long and
    /// its spacing is divided by `factor`; original voxels are copied
    /// unchanged. The tensor a fraction `t` of the way from voxel `i` to
    /// voxel `i+1` is the path point at `p = 1 − t` between them.
    pub fn upsample(&self, factor: usize, metric: MetricKind) -> Result<Self, FieldError> {
        if factor < 2 {
            return Err(FieldError::Validation(format!(
                "upsampling factor {factor} must be at least 2"
            )));
        }
        if metric == MetricKind::Riemannian {
            self.require_definite()?;
        }
        let mut field = self.clone();
        for axis in 0..3 {
            field = field.refine_axis(axis, factor, metric)?;
        }
        Ok(field)
    }

    fn require_definite(&self) -> Result<(), FieldError> {
        for (i, t) in self.tensors.iter().enumerate() {
            let eig = eig_sym(t)?;
            crate::linalg::eigen::require_definite(&eig).map_err(|source| FieldError::AtVoxel {
                voxel: self.voxel(i),
                source,
            })?;
        }
        Ok(())
    }

    fn refine_axis(&self, axis: usize, factor: usize, metric: MetricKind) -> Result<Self, FieldError> {
        let n = self.dims[axis];
        if n == 1 {
            return Ok(self.clone());
        }
        let mut dims = self.dims;
        dims[axis] = factor * (n - 1) + 1;
        let mut spacing = self.spacing;
        spacing[axis] /= factor as f64;

        // one path per neighbouring pair, each filling factor−1 slots
        let pairs: Vec<usize> = (0..self.len()).filter(|&i| self.voxel(i).0[axis] + 1 < n).collect();
        let inserted: Vec<(usize, Vec<SymMatrix>)> = pairs
            .par_iter()
            .map(|&i| {
                let here = self.voxel(i);
                let mut next = here;
                next.0[axis] += 1;
                let at = |source| FieldError::AtVoxel { voxel: here, source };
                let spec = GeodesicSpec::new(metric, self.tensors[i].clone(), self.get(next).clone()).map_err(at)?;
                let path = Geodesic::new(&spec).map_err(at)?;
                let points = (1..factor)
                    .map(|r| path.point(1.0 - r as f64 / factor as f64).map_err(at))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((i, points))
            })
            .collect::<Result<_, FieldError>>()?;

        let out = Self {
            dims,
            spacing,
            tensors: vec![SymMatrix::zeros(3); dims.iter().product()],
        };
        let mut tensors = out.tensors.clone();
        for (i, t) in self.tensors.iter().enumerate() {
            let mut v = self.voxel(i);
            v.0[axis] *= factor;
            tensors[out.index(v)] = t.clone();
        }
        for (i, points) in inserted {
            let base = self.voxel(i);
            for (r, t) in (1..).zip(points) {
                let mut v = base;
                v.0[axis] = base.0[axis] * factor + r;
                tensors[out.index(v)] = t;
            }
        }
        Ok(Self { tensors, ..out })
    }
}

/// Reads a lone tensor: a six-element array, or a field file with exactly
/// one voxel.
pub fn tensor_from_json(text: &str) -> Result<SymMatrix, FieldError> {
    if let Ok(c) = serde_json::from_str::<[f64; 6]>(text) {
        check_finite(&c, || "tensor".into())?;
        let t = from_components(c);
        if let Err(l) = check_psd(&t) {
            return Err(FieldError::Validation(format!(
                "tensor not positive semidefinite (smallest eigenvalue {l:e})"
            )));
        }
        return Ok(t);
    }
    let field = TensorField::from_json(text)?;
    if field.len() != 1 {
        return Err(FieldError::Validation(format!(
            "expected a single tensor, found a field of {}",
            field.len()
        )));
    }
    Ok(field.tensors[0].clone())
}

pub fn tensor_to_json(t: &SymMatrix) -> String {
    let mut s = serde_json::to_string(&to_components(t)).expect("finite values serialise");
    s.push('\n');
    s
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<SymMatrix, FieldError> {
    tensor_from_json(&read(path.as_ref())?)
}

fn read(path: &Path) -> Result<String, FieldError> {
    fs::read_to_string(path).map_err(|source| FieldError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), FieldError> {
    fs::write(path, text).map_err(|source| FieldError::Io {
        path: path.display().to_string(),
        source,
    })
}
