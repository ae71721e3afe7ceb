use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_arg, Error, Result};
use crate::matcore::{svd, DenseMatrix, IndexSet};
use crate::sketch::{MatrixSource, RankRFactors};

/// Singular values of a matrix and the tail norms derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    singular_values: Vec<f64>,
}

impl SpectrumSummary {
    pub fn new(singular_values: Vec<f64>) -> Result<Self> {
        check_spectrum(&singular_values)?;
        Ok(Self { singular_values })
    }

    /// Exact spectrum through a dense SVD.
    pub fn of_matrix(a: &DenseMatrix) -> Result<Self> {
        Self::new(svd(a, None)?.sigma)
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `√(Σ_{i>r} σ_i²)`.
    pub fn tail_fro(&self, r: usize) -> f64 {
        let start = r.min(self.singular_values.len());
        self.singular_values[start..].iter().rev().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// `σ_{r+1}`, or 0 past the end.
    pub fn tail_op(&self, r: usize) -> f64 {
        self.singular_values.get(r).copied().unwrap_or(0.0)
    }

    pub fn total_fro(&self) -> f64 {
        self.tail_fro(0)
    }
}

fn check_spectrum(sigma: &[f64]) -> Result<()> {
    ensure_arg!(sigma.iter().all(|s| s.is_finite() && *s >= 0.0), "singular values must be finite and nonnegative");
    ensure_arg!(sigma.windows(2).all(|w| w[0] >= w[1]), "singular values must be nonincreasing");
    Ok(())
}

/// `scree(r)` for `r = 0..=len`: the share of squared energy past `σ_r`.
pub fn scree_curve(sigma: &[f64]) -> Result<Vec<f64>> {
    check_spectrum(sigma)?;
    // Suffix sums from the small end keep the tail values accurate.
    let mut tails = vec![0.0; sigma.len() + 1];
    for i in (0..sigma.len()).rev() {
        tails[i] = tails[i + 1] + sigma[i] * sigma[i];
    }
    let total = tails[0];
    ensure_arg!(total > 0.0, "scree is undefined for an all-zero spectrum");
    Ok(tails.into_iter().map(|t| t / total).collect())
}

const ERROR_BLOCK_ROWS: usize = 256;

/// `‖A − U diag(σ) Vᵀ‖_F² / ‖A‖_F²`, accumulated over row blocks of `A` so
/// no second full-size matrix is formed.
pub fn approx_error<S: MatrixSource + ?Sized>(a: &S, approx: &RankRFactors) -> Result<f64> {
    let (m, n) = a.shape();
    ensure_arg!(
        approx.u.nrows() == m && approx.v.nrows() == n,
        "approximation is {}x{}, matrix is {m}x{n}",
        approx.u.nrows(),
        approx.v.nrows()
    );
    let right = approx.v.scale_columns(&approx.sigma);
    let (mut diff_sq, mut total_sq) = (0.0, 0.0);
    for start in (0..m).step_by(ERROR_BLOCK_ROWS) {
        let end = (start + ERROR_BLOCK_ROWS).min(m);
        let rows = IndexSet::new((start..end).collect(), m)?;
        let block = a.rows(&rows)?;
        let estimate = approx.u.rows_range(start..end).matmul_t(&right)?;
        total_sq += block.frobenius_norm_sq();
        diff_sq += block.as_ref().sub(&estimate)?.frobenius_norm_sq();
    }
    ensure_arg!(total_sq > 0.0, "relative error is undefined for a zero matrix");
    Ok(diff_sq / total_sq)
}

/// Peak signal-to-noise ratio in dB. An exact match has no finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn is_infinite(self) -> bool {
        self == Psnr::Infinite
    }

    pub fn value(self) -> f64 {
        match self {
            Psnr::Finite(v) => v,
            Psnr::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity, so the exact-match case is written as "inf".
impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => serializer.serialize_f64(*v),
            Psnr::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(Psnr::Finite(v)),
            Raw::Text(s) if s == "inf" => Ok(Psnr::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// `20 log₁₀(max|truth| / RMSE)` after flipping `estimate` if it points
/// away from `truth`; singular vectors are only defined up to sign.
pub fn psnr(truth: &[f64], estimate: &[f64]) -> Result<Psnr> {
    ensure_arg!(
        truth.len() == estimate.len(),
        "length mismatch: truth has {}, estimate has {}",
        truth.len(),
        estimate.len()
    );
    let peak = truth.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidArgument("PSNR needs a truth vector that is not all zero".into()));
    }
    let inner: f64 = truth.iter().zip(estimate).map(|(a, b)| a * b).sum();
    let sign = if inner < 0.0 { -1.0 } else { 1.0 };
    let mse = truth.iter().zip(estimate).map(|(a, b)| (a - sign * b).powi(2)).sum::<f64>() / truth.len() as f64;
    if mse == 0.0 {
        return Ok(Psnr::Infinite);
    }
    Ok(Psnr::Finite(20.0 * (peak / mse.sqrt()).log10()))
}
