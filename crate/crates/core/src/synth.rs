//! Synthetic test matrices with a prescribed spectrum and coherence.
//!
//! Matrices are built as `U diag(σ) Vᵀ` from random orthonormal factors, so
//! the singular values are known exactly and the optimal rank-r error is
//! `scree(r)` of the requested spectrum.

use serde::{Deserialize, Serialize};

use crate::diagnostics::scree_curve;
use crate::error::{ensure_arg, Result};
use crate::matcore::{gaussian_map, thin_qr, DenseMatrix, RandomStream};

/// Singular values of a synthetic matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Spectrum {
    /// Given values, nonincreasing and nonnegative.
    Explicit { values: Vec<f64> },
    /// `σ_i = i^(−exponent)` for `i = 1..=len`.
    Polynomial { len: usize, exponent: f64 },
    /// `σ_i = base^i` for `i = 1..=len`, with `0 < base ≤ 1`.
    Exponential { len: usize, base: f64 },
    /// `rank` values of 1 followed by `len − rank` values of `noise`.
    LowRankPlusNoise { len: usize, rank: usize, noise: f64 },
}

impl Spectrum {
    pub fn len(&self) -> usize {
        match self {
            Spectrum::Explicit { values } => values.len(),
            Spectrum::Polynomial { len, .. }
            | Spectrum::Exponential { len, .. }
            | Spectrum::LowRankPlusNoise { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self {
            Spectrum::Explicit { values } => values.clone(),
            Spectrum::Polynomial { len, exponent } => {
                ensure_arg!(exponent.is_finite() && *exponent >= 0.0, "decay exponent must be finite and >= 0");
                (1..=*len).map(|i| (i as f64).powf(-exponent)).collect()
            }
            Spectrum::Exponential { len, base } => {
                ensure_arg!(*base > 0.0 && *base <= 1.0, "exponential base must lie in (0, 1]");
                (1..=*len).map(|i| base.powi(i as i32)).collect()
            }
            Spectrum::LowRankPlusNoise { len, rank, noise } => {
                ensure_arg!(rank <= len, "rank {rank} exceeds spectrum length {len}");
                ensure_arg!(*noise >= 0.0 && *noise <= 1.0, "noise level must lie in [0, 1]");
                (0..*len).map(|i| if i < *rank { 1.0 } else { *noise }).collect()
            }
        };
        ensure_arg!(!v.is_empty(), "spectrum must not be empty");
        ensure_arg!(v.iter().all(|s| s.is_finite() && *s >= 0.0), "spectrum must be finite and nonnegative");
        ensure_arg!(v.windows(2).all(|w| w[0] >= w[1]), "spectrum must be nonincreasing");
        Ok(v)
    }
}

/// How singular-vector energy is spread over rows and columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoherenceMode {
    /// Haar-random factors: energy close to evenly spread.
    #[default]
    Incoherent,
    /// The leading left and right singular vectors each put a chosen share
    /// of their energy on one coordinate, so the rank-`rank` subspaces have
    /// coherence close to `mu` (rows) and `nu` (columns).
    Spiked { mu: f64, nu: f64, rank: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub spectrum: Spectrum,
    #[serde(default)]
    pub coherence: CoherenceMode,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(rows: usize, cols: usize, spectrum: Spectrum) -> Self {
        Self { rows, cols, spectrum, coherence: CoherenceMode::Incoherent, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_coherence(mut self, coherence: CoherenceMode) -> Self {
        self.coherence = coherence;
        self
    }

    /// Same spectrum family on a different shape. Parametric spectra are cut
    /// to fit; spiked targets are clamped to what the new shape allows.
    pub fn with_shape(mut self, rows: usize, cols: usize) -> Self {
        // A spiked factor keeps one coordinate aside, so it needs a spare row.
        let spiked = matches!(self.coherence, CoherenceMode::Spiked { .. });
        let cap = rows.min(cols) - usize::from(spiked);
        self.rows = rows;
        self.cols = cols;
        match &mut self.spectrum {
            Spectrum::Explicit { values } => values.truncate(cap),
            Spectrum::Polynomial { len, .. } | Spectrum::Exponential { len, .. } => *len = (*len).min(cap),
            Spectrum::LowRankPlusNoise { len, rank, .. } => {
                *len = (*len).min(cap);
                *rank = (*rank).min(*len);
            }
        }
        if let CoherenceMode::Spiked { mu, nu, rank } = &mut self.coherence {
            *mu = mu.min(rows as f64 / *rank as f64);
            *nu = nu.min(cols as f64 / *rank as f64);
        }
        self
    }

    pub fn validate(&self) -> Result<Vec<f64>> {
        let values = self.spectrum.values()?;
        let len = values.len();
        ensure_arg!(
            self.rows >= len && self.cols >= len,
            "spectrum length {len} exceeds the {}x{} shape",
            self.rows,
            self.cols
        );
        if let CoherenceMode::Spiked { mu, nu, rank } = self.coherence {
            ensure_arg!(rank >= 1, "spiked coherence needs rank >= 1");
            ensure_arg!(mu >= 1.0 && nu >= 1.0, "coherence targets must be at least 1");
            let (mu_max, nu_max) = (self.rows as f64 / rank as f64, self.cols as f64 / rank as f64);
            ensure_arg!(mu <= mu_max, "target mu = {mu} is infeasible: it must be <= M/r = {mu_max}");
            ensure_arg!(nu <= nu_max, "target nu = {nu} is infeasible: it must be <= N/r = {nu_max}");
            ensure_arg!(
                len < self.rows && len < self.cols,
                "spiked coherence needs a spectrum shorter than both dimensions"
            );
        }
        Ok(values)
    }
}

/// Orthonormal `rows x cols` factor with the distribution of the first
/// `cols` columns of a Haar orthogonal matrix.
fn haar_factor(rows: usize, cols: usize, rng: RandomStream) -> Result<DenseMatrix> {
    Ok(thin_qr(&gaussian_map(rows, cols, rng)?)?.0)
}

/// Haar factor whose first column puts `share` of its energy on row 0 and
/// whose remaining columns are orthogonal to row 0.
fn spiked_factor(rows: usize, cols: usize, share: f64, rng: RandomStream) -> Result<DenseMatrix> {
    let rest = haar_factor(rows - 1, cols, rng)?;
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..rows - 1 {
        out.row_mut(i + 1).copy_from_slice(rest.row(i));
    }
    let keep = (1.0 - share).sqrt();
    for i in 1..rows {
        let v = out.get(i, 0) * keep;
        out.set(i, 0, v);
    }
    out.set(0, 0, share.sqrt());
    Ok(out)
}

/// Builds the matrix described by `spec`. Same spec, same matrix.
pub fn generate(spec: &SynthSpec) -> Result<DenseMatrix> {
    let sigma = spec.validate()?;
    let len = sigma.len();
    let base = RandomStream::new(spec.seed, 0);
    let (u, v) = match spec.coherence {
        CoherenceMode::Incoherent => {
            (haar_factor(spec.rows, len, base.fork(1))?, haar_factor(spec.cols, len, base.fork(2))?)
        }
        CoherenceMode::Spiked { mu, nu, rank } => {
            let row_share = mu * rank as f64 / spec.rows as f64;
            let col_share = nu * rank as f64 / spec.cols as f64;
            (
                spiked_factor(spec.rows, len, row_share, base.fork(1))?,
                spiked_factor(spec.cols, len, col_share, base.fork(2))?,
            )
        }
    };
    u.scale_columns(&sigma).matmul_t(&v)
}

/// Exponent `α` for which `σ_i = i^(−α)`, `i = 1..=len`, has `scree(rank) = target`.
pub fn fit_polynomial_exponent(len: usize, rank: usize, target: f64) -> Result<f64> {
    ensure_arg!(rank >= 1 && rank < len, "rank must satisfy 1 <= rank < len");
    ensure_arg!(target > 0.0 && target < 1.0, "target scree must lie in (0, 1)");
    let scree_at = |alpha: f64| -> Result<f64> {
        let values = Spectrum::Polynomial { len, exponent: alpha }.values()?;
        Ok(scree_curve(&values)?[rank])
    };
    // scree(rank) falls as the exponent grows.
    let (mut lo, mut hi) = (0.0, 20.0);
    ensure_arg!(
        scree_at(lo)? >= target && scree_at(hi)? <= target,
        "target scree {target} is out of reach for length {len} at rank {rank}"
    );
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if scree_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn dataset_like(rows: usize, cols: usize, len: usize, rank: usize, target: f64, mu: f64, nu: f64) -> SynthSpec {
    let exponent = fit_polynomial_exponent(len, rank, target).expect("built-in calibration targets are reachable");
    SynthSpec::new(rows, cols, Spectrum::Polynomial { len, exponent }).with_coherence(CoherenceMode::Spiked {
        mu,
        nu,
        rank,
    })
}

/// 2500 x 640 face-image stand-in: `scree(20) ≈ 0.033`, coherence (4.11, 2.71).
pub fn yale_like_spec() -> SynthSpec {
    dataset_like(2500, 640, 639, 20, 0.033, 4.1137, 2.7068)
}

/// Cardiac MRI stand-in, rows scaled down to 4096 x 160: `scree(5) ≈ 0.0011`.
pub fn cardiac_like_spec() -> SynthSpec {
    dataset_like(4096, 160, 159, 5, 0.0011, 127.5935, 2.1507)
}

/// Video stand-in scaled down to 4000 x 1100 with 400 nonzero singular
/// values: `scree(25) ≈ 0.0066`.
pub fn video_like_spec() -> SynthSpec {
    dataset_like(4000, 1100, 400, 25, 0.0066, 20.3505, 14.0194)
}
