//! Seeded random instances.
//!
//! Every random quantity of a trial comes from a ChaCha stream keyed by
//! `(seed, trial index, stream)`, so a trial can be regenerated in isolation
//! and campaigns are reproducible regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{polar, Matrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMode {
    Full,
    Deficient,
    Mixed,
}

impl std::str::FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "deficient" => Ok(Self::Deficient),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::InvalidConfig(format!("unknown rank mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for RankMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Deficient => "deficient",
            Self::Mixed => "mixed",
        })
    }
}

/// Parameters of a random PSD ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub trials: u64,
    pub seed: u64,
    pub rank_mode: RankMode,
    pub scale_range: (f64, f64),
}

pub const MAX_DIM: usize = 8;

impl EnsembleSpec {
    pub fn new(dim: usize, trials: u64, seed: u64, rank_mode: RankMode) -> Result<Self> {
        let spec = Self {
            dim,
            trials,
            seed,
            rank_mode,
            scale_range: (0.1, 10.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scale_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.scale_range = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidConfig(format!(
                "dimension {} outside 2..={MAX_DIM}",
                self.dim
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trial count must be positive".into()));
        }
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid scale range ({lo}, {hi})")));
        }
        Ok(())
    }

    /// Random stream `stream` of trial `index`.
    pub fn rng(&self, index: u64, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(
            mix(self.seed ^ mix(index)) ^ stream.wrapping_mul(0xA24B_AED4_963E_E407)
        ))
    }

    /// Whether draw `stream` of trial `index` is rank deficient. In mixed
    /// mode bit `stream` of the index decides, so consecutive trials cycle
    /// through every full/deficient combination of their first draws.
    pub fn is_deficient(&self, index: u64, stream: u64) -> bool {
        match self.rank_mode {
            RankMode::Full => false,
            RankMode::Deficient => true,
            RankMode::Mixed => (index >> (stream % 64)) & 1 == 1,
        }
    }

    /// Log-uniform scale factor from `scale_range`.
    pub fn scale(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = self.scale_range;
        (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
    }

    /// `s·GGᵀ/dim` for Gaussian `G`, with `⌈dim/2⌉` columns of `G` zeroed
    /// when the draw is rank deficient.
    pub fn draw(&self, index: u64, stream: u64) -> SymMatrix {
        let n = self.dim;
        let mut rng = self.rng(index, stream);
        let s = self.scale(&mut rng);
        let mut g: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        if self.is_deficient(index, stream) {
            for row in g.chunks_mut(n) {
                for v in &mut row[..n.div_ceil(2)] {
                    *v = 0.0;
                }
            }
        }
        // GGᵀ is the Gram matrix of Gᵀ
        let gt = Matrix::from_row_major(n, g).expect("finite normals").transpose();
        gt.gram().scale(s / n as f64)
    }

    /// Haar-distributed orthogonal matrix: the polar factor of a Gaussian
    /// matrix.
    pub fn orthogonal(&self, rng: &mut ChaCha8Rng) -> Matrix {
        let n = self.dim;
        let g: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let g = Matrix::from_row_major(n, g).expect("finite normals");
        polar(&g).expect("Jacobi SVD of a small Gaussian matrix").orthogonal
    }

    /// A simultaneously diagonalisable pair `V·diag(a)·Vᵀ`, `V·diag(b)·Vᵀ`
    /// with log-uniform spectra; deficient draws zero `⌈dim/2⌉` eigenvalues.
    pub fn commuting_pair(&self, index: u64) -> (SymMatrix, SymMatrix) {
        let mut rng = self.rng(index, 0);
        let v = self.orthogonal(&mut rng);
        let mut spectrum = |stream: u64| -> Vec<f64> {
            let mut d: Vec<f64> = (0..self.dim).map(|_| self.scale(&mut rng)).collect();
            if self.is_deficient(index, stream) {
                for x in &mut d[..self.dim.div_ceil(2)] {
                    *x = 0.0;
                }
            }
            d
        };
        let a = spectrum(0);
        let b = spectrum(1);
        (SymMatrix::from_spectrum(&v, &a), SymMatrix::from_spectrum(&v, &b))
    }
}

/// `generate_psd` draw for `index`: the first matrix of that trial.
pub fn generate_psd(spec: &EnsembleSpec, index: u64) -> SymMatrix {
    spec.draw(index, 0)
}

// splitmix64 finaliser
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_sym, is_psd};

    #[test]
    fn draws_are_deterministic_and_psd() {
        let spec = EnsembleSpec::new(4, 10, 7, RankMode::Full).unwrap();
        assert_eq!(generate_psd(&spec, 3), generate_psd(&spec, 3));
        assert_ne!(generate_psd(&spec, 3), generate_psd(&spec, 4));
        for i in 0..10 {
            assert!(is_psd(&generate_psd(&spec, i), 1e-10));
        }
    }

    #[test]
    fn deficient_draws_have_half_rank() {
        let spec = EnsembleSpec::new(4, 10, 1, RankMode::Deficient).unwrap();
        for i in 0..10 {
            let e = eig_sym(&generate_psd(&spec, i)).unwrap();
            let tol = e.psd_tolerance();
            assert!(e.eigenvalues.iter().filter(|&&l| l > tol).count() <= 2);
        }
    }

    #[test]
    fn mixed_mode_covers_all_combinations() {
        let spec = EnsembleSpec::new(3, 4, 0, RankMode::Mixed).unwrap();
        let combos: Vec<(bool, bool)> = (0..4)
            .map(|i| (spec.is_deficient(i, 0), spec.is_deficient(i, 1)))
            .collect();
        assert_eq!(combos, [(false, false), (true, false), (false, true), (true, true)]);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(EnsembleSpec::new(1, 10, 0, RankMode::Full).is_err());
        assert!(EnsembleSpec::new(9, 10, 0, RankMode::Full).is_err());
        assert!(EnsembleSpec::new(3, 0, 0, RankMode::Full).is_err());
        let spec = EnsembleSpec::new(3, 1, 0, RankMode::Full).unwrap();
        assert!(spec.with_scale_range(2.0, 1.0).is_err());
        assert!(spec.with_scale_range(0.0, 1.0).is_err());
    }

    #[test]
    fn commuting_pairs_commute() {
        let spec = EnsembleSpec::new(4, 1, 3, RankMode::Full).unwrap();
        let (a, b) = spec.commuting_pair(0);
        let ab = a.matmul(&b.as_matrix());
        let ba = b.matmul(&a.as_matrix());
        assert!((&ab - &ba).frobenius_norm() < 1e-12 * ab.frobenius_norm());
    }
}
