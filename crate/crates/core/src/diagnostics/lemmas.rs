//! Empirical checks of the auxiliary results behind the error bounds.
//!
//! Monte Carlo checks draw trial `t` from `rng.fork(t)`, so the outcome does
//! not depend on how trials are scheduled.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::incoherence::incoherence;
use super::theory::sample_floor;
use crate::error::{ensure_arg, Error, Result};
use crate::matcore::{
    gaussian_map, orthogonal_complement, pseudo_inverse_with_rank, sample_without_replacement, svd, thin_qr,
    DenseMatrix, IndexSet, RandomStream,
};
use crate::sketch::{ApproxFactors, CoreSketch};

/// How many of `trials` Monte Carlo draws satisfied a check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassRate {
    pub trials: usize,
    pub passes: usize,
}

impl PassRate {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.passes as f64 / self.trials as f64
        }
    }
}

/// Singular-value bounds for row subsamples of an orthonormal basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleReport {
    pub pass_rate: PassRate,
    /// `√(n / 6N)`.
    pub lower: f64,
    /// `√(13n / 6N)`.
    pub upper: f64,
    /// Measured coherence of the basis.
    pub coherence: f64,
    /// `8 μ r ln r`; the bounds are only promised above this sample size.
    pub sample_floor: f64,
    pub floor_met: bool,
    /// `1 − 2/r³`.
    pub expected_rate: f64,
}

/// Samples `n` of the `N` rows of `v1` uniformly, `trials` times, and counts
/// how often `√(n/6N) ≤ σ_r(V₁(Θ,:))` and `σ_1(V₁(Θ,:)) ≤ √(13n/6N)` both hold.
pub fn check_lemma1(v1: &DenseMatrix, n: usize, trials: usize, rng: RandomStream) -> Result<SubsampleReport> {
    let (big_n, r) = v1.shape();
    ensure_arg!(n <= big_n, "sample size n = {n} exceeds N = {big_n}");
    ensure_arg!(n >= 1, "sample size n must be at least 1");
    let coherence = incoherence(v1, r)?;
    let ratio = n as f64 / big_n as f64;
    let lower = (ratio / 6.0).sqrt();
    let upper = (13.0 * ratio / 6.0).sqrt();
    let mut passes = 0;
    for t in 0..trials {
        let theta = sample_without_replacement(n, big_n, rng.fork(t as u64))?;
        let sigma = svd(&v1.select_rows(&theta)?, None)?.sigma;
        // Fewer sampled rows than columns leaves σ_r = 0.
        let smallest = if n >= r { sigma[r - 1] } else { 0.0 };
        if lower <= smallest && sigma[0] <= upper {
            passes += 1;
        }
    }
    let floor = sample_floor(coherence, r);
    Ok(SubsampleReport {
        pass_rate: PassRate { trials, passes },
        lower,
        upper,
        coherence,
        sample_floor: floor,
        floor_met: n as f64 >= floor,
        expected_rate: 1.0 - 2.0 / (r as f64).powi(3),
    })
}

/// Both sides of the deterministic range-capture inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeCaptureSides {
    /// `‖A − QQᵀA‖_F²`.
    pub lhs: f64,
    /// `‖Σ₂‖_F² + ‖Σ₂ Ω₂ Ω₁†‖_F²`.
    pub rhs: f64,
}

impl RangeCaptureSides {
    /// `lhs ≤ rhs` up to `rel_slack · rhs` (plus the same slack on `‖A‖_F²`
    /// when `rhs` is zero).
    pub fn holds(&self, rel_slack: f64, total_sq: f64) -> bool {
        self.lhs <= self.rhs + rel_slack * self.rhs.max(total_sq * f64::EPSILON)
    }
}

/// Evaluates `‖A − QQᵀA‖_F² ≤ ‖Σ₂‖_F² + ‖Σ₂Ω₂Ω₁†‖_F²` for
/// `Q = orth(A(:,Θ) Ωᵀ)`, splitting the true SVD of `A` at rank `r`.
///
/// Returns [`Error::Degenerate`] when `Ω₁ = V₁(Θ,:)ᵀ Ωᵀ` is not of full row rank.
pub fn check_lemma3(a: &DenseMatrix, r: usize, theta: &IndexSet, omega: &DenseMatrix) -> Result<RangeCaptureSides> {
    let (m, n) = a.shape();
    ensure_arg!(theta.population() == n, "column set is over {}, matrix has {n} columns", theta.population());
    ensure_arg!(
        omega.ncols() == theta.len(),
        "map has {} columns, {} columns were sampled",
        omega.ncols(),
        theta.len()
    );
    ensure_arg!(r >= 1 && r <= m.min(n), "rank r = {r} out of range for a {m}x{n} matrix");

    let dec = svd(a, None)?;
    let p = dec.sigma.len();
    let v_sampled = dec.v.select_rows(theta)?;
    let omega1 = v_sampled.columns(0..r).t_matmul(&omega.transpose())?;
    let (omega1_pinv, rank) = pseudo_inverse_with_rank(&omega1, None)?;
    if rank < r {
        return Err(Error::Degenerate(format!("Ω₁ has rank {rank} < r = {r}")));
    }
    let tail: Vec<f64> = dec.sigma[r..].to_vec();
    let tail_sq: f64 = tail.iter().map(|s| s * s).sum();
    let cross = if r < p {
        let omega2 = v_sampled.columns(r..p).t_matmul(&omega.transpose())?;
        let mut scaled = omega2.matmul(&omega1_pinv)?;
        for (i, s) in tail.iter().enumerate() {
            scaled.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        scaled.frobenius_norm_sq()
    } else {
        0.0
    };

    let y = a.select_cols(theta)?.matmul_t(omega)?;
    let (q, _) = thin_qr(&y)?;
    let lhs = a.sub(&q.matmul(&q.t_matmul(a)?)?)?.frobenius_norm_sq();
    Ok(RangeCaptureSides { lhs, rhs: tail_sq + cross })
}

/// Tail bound on the pseudo-inverse of a `k x r` standard Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoInverseTailReport {
    pub pass_rate: PassRate,
    /// `e √k / (k − r + 1) · k^{3/(k−r+1)}`.
    pub bound: f64,
    /// `1 − 1/k³`.
    pub expected_rate: f64,
}

/// The bound `‖G†‖₂` is promised to stay under with probability `1 − 1/k³`.
pub fn pseudo_inverse_tail_bound(k: usize, r: usize) -> f64 {
    let gap = (k - r + 1) as f64;
    E * (k as f64).sqrt() / gap * (k as f64).powf(3.0 / gap)
}

/// Counts draws of `G ∈ ℝ^{k×r}` with `‖G†‖₂ = 1/σ_min(G)` under the bound.
pub fn check_lemma4(k: usize, r: usize, trials: usize, rng: RandomStream) -> Result<PseudoInverseTailReport> {
    ensure_arg!(r >= 1, "rank r must be at least 1");
    ensure_arg!(k >= r + 4, "k >= r + 4 violated: k = {k}, r = {r}");
    let bound = pseudo_inverse_tail_bound(k, r);
    let mut passes = 0;
    for t in 0..trials {
        let g = gaussian_map(k, r, rng.fork(t as u64))?;
        let smallest = svd(&g, None)?.sigma[r - 1];
        if smallest > 0.0 && 1.0 / smallest <= bound {
            passes += 1;
        }
    }
    Ok(PseudoInverseTailReport {
        pass_rate: PassRate { trials, passes },
        bound,
        expected_rate: 1.0 - 1.0 / (k as f64).powi(3),
    })
}

/// Monte Carlo estimate of `E‖S G T‖_F²` against `‖S‖_F² ‖T‖_F²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub trials: usize,
    pub target: f64,
    pub mean: f64,
    /// `|mean − target| / target`.
    pub deviation: f64,
}

pub fn check_lemma5(s: &DenseMatrix, t: &DenseMatrix, trials: usize, rng: RandomStream) -> Result<ExpectationReport> {
    ensure_arg!(trials >= 1, "at least one trial is needed");
    let target = s.frobenius_norm_sq() * t.frobenius_norm_sq();
    ensure_arg!(target > 0.0, "S and T must both be nonzero");
    let (inner_rows, inner_cols) = (s.ncols(), t.nrows());
    // Kahan summation keeps the mean exact to rounding over many trials.
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for i in 0..trials {
        let g = gaussian_map(inner_rows, inner_cols, rng.fork(i as u64))?;
        let value = s.matmul(&g)?.matmul(t)?.frobenius_norm_sq();
        let y = value - comp;
        let next = sum + y;
        comp = (next - sum) - y;
        sum = next;
    }
    let mean = sum / trials as f64;
    Ok(ExpectationReport { trials, target, mean, deviation: (mean - target).abs() / target })
}

/// Relative residual of the core error decomposition
///
/// `C − QᵀAP = Φ₁†Φ₂(Q⊥ᵀAP) + (QᵀAP⊥)Ψ₂ᵀ(Ψ₁†)ᵀ + Φ₁†Φ₂(Q⊥ᵀAP⊥)Ψ₂ᵀ(Ψ₁†)ᵀ`
///
/// with `Φ₁ = ΦQ(Δ′,:)`, `Φ₂ = ΦQ⊥(Δ′,:)` and likewise for `Ψ`. The identity is
/// exact whenever `Φ₁`, `Ψ₁` have full column rank and `C` was solved from
/// this sketch, so the residual is rounding-level. Rank-deficient `Φ₁` or
/// `Ψ₁` gives [`Error::Degenerate`].
pub fn check_lemma7(a: &DenseMatrix, factors: &ApproxFactors, sk: &CoreSketch) -> Result<f64> {
    ensure_arg!(a.shape() == sk.shape, "matrix is {:?}, sketch is of {:?}", a.shape(), sk.shape);
    let (q, p, c) = (&factors.q, &factors.p, &factors.core);
    let k = q.ncols();
    let q_perp = orthogonal_complement(q)?;
    let p_perp = orthogonal_complement(p)?;

    let phi1 = sk.phi.matmul(&q.select_rows(&sk.core_rows)?)?;
    let psi1 = sk.psi.matmul(&p.select_rows(&sk.core_cols)?)?;
    let (phi1_pinv, phi_rank) = pseudo_inverse_with_rank(&phi1, None)?;
    let (psi1_pinv, psi_rank) = pseudo_inverse_with_rank(&psi1, None)?;
    if phi_rank < k || psi_rank < k {
        return Err(Error::Degenerate(format!("Φ₁ has rank {phi_rank}, Ψ₁ has rank {psi_rank}; both need rank {k}")));
    }

    let qt_a = q.t_matmul(a)?;
    let qperp_t_a = q_perp.t_matmul(a)?;
    let qt_a_p = qt_a.matmul(p)?;

    // Left factor Φ₁†Φ₂ (k x (M−k)) and right factor Ψ₂ᵀ(Ψ₁†)ᵀ ((N−k) x k).
    // Either complement can be empty when k equals the dimension.
    let left = if q_perp.ncols() > 0 {
        Some(phi1_pinv.matmul(&sk.phi.matmul(&q_perp.select_rows(&sk.core_rows)?)?)?)
    } else {
        None
    };
    let right = if p_perp.ncols() > 0 {
        Some(sk.psi.matmul(&p_perp.select_rows(&sk.core_cols)?)?.t_matmul(&psi1_pinv.transpose())?)
    } else {
        None
    };

    let mut rhs = DenseMatrix::zeros(k, k);
    if let Some(l) = &left {
        rhs = rhs.add(&l.matmul(&qperp_t_a.matmul(p)?)?)?;
    }
    if let Some(rt) = &right {
        rhs = rhs.add(&qt_a.matmul(&p_perp)?.matmul(rt)?)?;
    }
    if let (Some(l), Some(rt)) = (&left, &right) {
        rhs = rhs.add(&l.matmul(&qperp_t_a.matmul(&p_perp)?)?.matmul(rt)?)?;
    }
    let lhs = c.sub(&qt_a_p)?;
    let residual = lhs.sub(&rhs)?.frobenius_norm();
    Ok(residual / c.frobenius_norm().max(f64::MIN_POSITIVE))
}
