//! Earlier sketch-based low-rank approximations, kept as comparison points.
//!
//! All of them sketch the whole matrix with Gaussian maps `Γ` (`k x M`),
//! `Ω` (`k x N`) and, for the three-sketch method, `Φ` (`s x M`), `Ψ` (`s x N`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Error, Result};
use crate::matcore::{gaussian_map, pseudo_inverse, svd, thin_qr, DenseMatrix, RandomStream};
use crate::sketch::RankRFactors;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    /// Two-sided average of the left and right core estimates.
    Hmt,
    /// QR of `ΓQ`, truncation of the projected row sketch.
    Woodruff,
    /// Like `Woodruff` with the range basis taken from a rank-r SVD of `Y`.
    Cohen,
    /// Three-sketch core solve through SVDs of `ΦQ` and `ΨP`.
    Boutsidis,
    /// Least-squares fit of the row sketch onto the range basis.
    Tropp17,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 5] = [
        BaselineMethod::Hmt,
        BaselineMethod::Woodruff,
        BaselineMethod::Cohen,
        BaselineMethod::Boutsidis,
        BaselineMethod::Tropp17,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Hmt => "hmt",
            BaselineMethod::Woodruff => "woodruff",
            BaselineMethod::Cohen => "cohen",
            BaselineMethod::Boutsidis => "boutsidis",
            BaselineMethod::Tropp17 => "tropp17",
        }
    }

    /// Whether the method builds the two-sided core sketch `Z`.
    pub fn uses_core_sketch(self) -> bool {
        self == BaselineMethod::Boutsidis
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown baseline method '{s}'")))
    }
}

/// Runs one baseline and returns its rank-`r` approximation in SVD form.
pub fn baseline_approx(
    a: &DenseMatrix,
    method: BaselineMethod,
    r: usize,
    k: usize,
    s: usize,
    rng: RandomStream,
) -> Result<RankRFactors> {
    let (m, n) = a.shape();
    ensure_arg!(r >= 1, "rank r must be at least 1");
    ensure_arg!(r <= k, "r <= k violated: r = {r}, k = {k}");
    ensure_arg!(k <= m.min(n), "k <= min(M, N) violated: k = {k}, M = {m}, N = {n}");
    if method.uses_core_sketch() {
        ensure_arg!(k <= s, "k <= s violated: k = {k}, s = {s}");
        ensure_arg!(s <= m.min(n), "s <= min(M, N) violated: s = {s}, M = {m}, N = {n}");
    }

    let gamma = gaussian_map(k, m, rng.fork(1))?;
    let omega = gaussian_map(k, n, rng.fork(2))?;
    let x = gamma.matmul(a)?;
    let y = a.matmul_t(&omega)?;

    match method {
        BaselineMethod::Hmt => {
            let p = svd(&x.transpose(), Some(r))?.u;
            let q = svd(&y, Some(r))?.u;
            let c1 = q.t_matmul(&y)?.matmul_t(&pseudo_inverse(&omega.matmul(&p)?, None)?)?;
            let c2 = pseudo_inverse(&gamma.matmul(&q)?, None)?.matmul(&x.matmul(&p)?)?;
            let avg = c1.add(&c2)?.scale(0.5);
            two_sided(&q, &avg, &p, r)
        }
        BaselineMethod::Woodruff => {
            let (q, _) = thin_qr(&y)?;
            projected_row_fit(&q, &gamma, &x, r)
        }
        BaselineMethod::Cohen => {
            let v = svd(&y, Some(r))?.u;
            projected_row_fit(&v, &gamma, &x, r)
        }
        BaselineMethod::Boutsidis => {
            let phi = gaussian_map(s, m, rng.fork(3))?;
            let psi = gaussian_map(s, n, rng.fork(4))?;
            let z = phi.matmul(a)?.matmul_t(&psi)?;
            let (p, _) = thin_qr(&x.transpose())?;
            let (q, _) = thin_qr(&y)?;
            let left = svd(&phi.matmul(&q)?, None)?;
            let right = svd(&psi.matmul(&p)?, None)?;
            let inner = left.u.t_matmul(&z)?.matmul(&right.u)?;
            let inner_r = svd(&inner, Some(r))?.reconstruct();
            let core = left
                .v
                .scale_columns(&reciprocals(&left.sigma))
                .matmul(&inner_r)?
                .matmul_t(&right.v.scale_columns(&reciprocals(&right.sigma)))?;
            two_sided(&q, &core, &p, r)
        }
        BaselineMethod::Tropp17 => {
            let (q, _) = thin_qr(&y)?;
            let w = pseudo_inverse(&gamma.matmul(&q)?, None)?.matmul(&x)?;
            one_sided(&q, &w, r)
        }
    }
}

/// `B T† [[Uᵀ X]]_r` with `ΓB = U T`, shared by the two QR-of-`ΓB` methods.
fn projected_row_fit(basis: &DenseMatrix, gamma: &DenseMatrix, x: &DenseMatrix, r: usize) -> Result<RankRFactors> {
    let (u, t) = thin_qr(&gamma.matmul(basis)?)?;
    let projected = u.t_matmul(x)?;
    let best = svd(&projected, Some(r))?;
    let left = pseudo_inverse(&t, None)?.matmul(&best.u.scale_columns(&best.sigma))?;
    // basis · left · best.vᵀ, where best.v already has orthonormal columns.
    two_sided(basis, &left, &best.v, r)
}

/// Entrywise pseudo-inverse of a nonincreasing diagonal.
fn reciprocals(sigma: &[f64]) -> Vec<f64> {
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = sigma.len() as f64 * f64::EPSILON * smax;
    sigma.iter().map(|&v| if v > cutoff && v > 0.0 { 1.0 / v } else { 0.0 }).collect()
}

/// Rank-`r` SVD form of `L K Rᵀ` for orthonormal-column `L`, `R`.
fn two_sided(left: &DenseMatrix, core: &DenseMatrix, right: &DenseMatrix, r: usize) -> Result<RankRFactors> {
    let dec = svd(core, Some(r))?;
    Ok(RankRFactors { u: left.matmul(&dec.u)?, sigma: dec.sigma, v: right.matmul(&dec.v)? })
}

/// Rank-`r` SVD form of `L W` for orthonormal-column `L` and a wide `W`.
fn one_sided(left: &DenseMatrix, wide: &DenseMatrix, r: usize) -> Result<RankRFactors> {
    let dec = svd(wide, Some(r))?;
    Ok(RankRFactors { u: left.matmul(&dec.u)?, sigma: dec.sigma, v: dec.v })
}
