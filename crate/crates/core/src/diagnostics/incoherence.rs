use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::matcore::{svd, DenseMatrix};
use crate::sketch::ApproxFactors;

const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Coherence of the true singular subspaces (`mu`, `nu`, at scale r) and of
/// the computed bases `Q`, `P` (`mu_prime`, `nu_prime`, at scale k).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncoherenceStats {
    pub mu: f64,
    pub nu: f64,
    pub mu_prime: f64,
    pub nu_prime: f64,
}

/// Smallest `μ` with `max_i ‖basis(i,:)‖ ≤ √(μ · rank_scale / rows)`.
///
/// A basis whose energy is spread evenly over the rows gives 1 (at
/// `rank_scale = cols`); one that puts a whole column on one row gives up to
/// `rows / rank_scale`.
pub fn incoherence(basis: &DenseMatrix, rank_scale: usize) -> Result<f64> {
    ensure_arg!(rank_scale >= 1, "rank scale must be at least 1");
    let defect = basis.orthonormality_defect();
    ensure_arg!(defect <= ORTHONORMALITY_TOL, "basis columns are not orthonormal (‖BᵀB − I‖_F = {defect:.3e})");
    let max_sq = (0..basis.nrows()).map(|i| basis.row(i).iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
    Ok(basis.nrows() as f64 / rank_scale as f64 * max_sq)
}

/// All four coherences: the rank-r singular subspaces of `a` and the
/// computed bases in `factors`.
pub fn incoherence_stats(a: &DenseMatrix, r: usize, factors: &ApproxFactors) -> Result<IncoherenceStats> {
    let dec = svd(a, Some(r))?;
    let k = factors.q.ncols();
    Ok(IncoherenceStats {
        mu: incoherence(&dec.u, r)?,
        nu: incoherence(&dec.v, r)?,
        mu_prime: incoherence(&factors.q, k)?,
        nu_prime: incoherence(&factors.p, k)?,
    })
}
