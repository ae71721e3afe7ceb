use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::incoherence::{incoherence, IncoherenceStats};
use super::metrics::SpectrumSummary;
use crate::error::{ensure_arg, Result};
use crate::matcore::{svd, DenseMatrix};
use crate::sketch::{build_core_sketches, range_bases, solve_core, truncate, ApproxFactors, SketchConfig};

/// Constants of the range (C1, C2) and core (C, C3, C4) error bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub c1: f64,
    pub c2: f64,
    pub cqsk: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Sample sizes the bounds ask for, next to the sizes actually used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFloor {
    pub required: f64,
    pub available: usize,
    pub satisfied: bool,
}

impl SampleFloor {
    fn new(required: f64, available: usize) -> Self {
        Self { required, available, satisfied: available as f64 >= required }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFloors {
    /// `m ≥ 8 μ r ln r`.
    pub rows: SampleFloor,
    /// `n ≥ 8 ν r ln r`.
    pub cols: SampleFloor,
    /// `m′ ≥ 8 μ′ k ln k`.
    pub core_rows: SampleFloor,
    /// `n′ ≥ 8 ν′ k ln k`.
    pub core_cols: SampleFloor,
}

impl SampleFloors {
    pub fn range_satisfied(&self) -> bool {
        self.rows.satisfied && self.cols.satisfied
    }

    pub fn core_satisfied(&self) -> bool {
        self.core_rows.satisfied && self.core_cols.satisfied
    }
}

/// Bound values for one matrix and configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub constants: TheoryConstants,
    pub tail_fro: f64,
    pub tail_op: f64,
    pub incoherence: IncoherenceStats,
    /// Bound on `max(‖A − QQᵀA‖_F, ‖A − APPᵀ‖_F)`.
    pub bound_range: f64,
    /// Bound on `‖A − Â‖_F`.
    pub bound_initial: f64,
    /// Bound on `‖A − [[Â]]_r‖_F`.
    pub bound_final: f64,
    pub probability_floor_range: f64,
    pub probability_floor_core: f64,
    pub sample_floors: SampleFloors,
}

fn check_hypotheses(p: f64, q: f64, s: usize, k: usize, r: usize) -> Result<()> {
    ensure_arg!(r >= 1, "rank r must be at least 1");
    ensure_arg!(k >= r + 4, "k >= r + 4 violated: k = {k}, r = {r}");
    ensure_arg!(s >= k + 4, "s >= k + 4 violated: s = {s}, k = {k}");
    ensure_arg!(p > 0.0 && p <= 1.0, "0 < p <= 1 violated: p = {p}");
    ensure_arg!(q > 0.0 && q <= 1.0, "0 < q <= 1 violated: q = {q}");
    ensure_arg!(p <= q, "p <= q violated: p = {p}, q = {q}");
    Ok(())
}

/// Evaluates the five constants. Logarithms are natural.
pub fn theory_constants(p: f64, q: f64, s: usize, k: usize, r: usize) -> Result<TheoryConstants> {
    check_hypotheses(p, q, s, k, r)?;
    let (kf, sf) = (k as f64, s as f64);
    let gap = (k - r + 1) as f64;
    let k_power = kf.powf(3.0 / gap);
    let c1 = (6.0 * E * E / p).sqrt() * kf / gap * k_power;
    let c2 = (36.0 * E * E / p).sqrt() * (kf * kf.ln()).sqrt() / gap * k_power;
    let core_gap = (s - k + 1) as f64;
    let cqsk = 6.0 * E * E / q * sf.powf(1.0 + 6.0 / core_gap) / (core_gap * core_gap)
        * (sf.sqrt() + (6.0 * sf.ln()).sqrt()).powi(2);
    let shared = 3f64.sqrt() * cqsk + 2f64.sqrt();
    Ok(TheoryConstants { c1, c2, cqsk, c3: c1 * shared, c4: c2 * shared })
}

/// `1 − 4/r³ − 4/k³`.
pub fn probability_floor_range(r: usize, k: usize) -> f64 {
    1.0 - 4.0 / (r as f64).powi(3) - 4.0 / (k as f64).powi(3)
}

/// `1 − 4/k³ − 6/s³`.
pub fn probability_floor_core(k: usize, s: usize) -> f64 {
    1.0 - 4.0 / (k as f64).powi(3) - 6.0 / (s as f64).powi(3)
}

/// `8 · coherence · rank · ln(rank)`.
pub fn sample_floor(coherence: f64, rank: usize) -> f64 {
    8.0 * coherence * rank as f64 * (rank as f64).ln()
}

/// Fills in the bound values for a matrix with spectrum `spec` and shape
/// `shape`, sketched with `cfg`.
pub fn evaluate_bounds(
    spec: &SpectrumSummary,
    inc: &IncoherenceStats,
    cfg: &SketchConfig,
    shape: (usize, usize),
) -> Result<TheoryReport> {
    let (r, k, s) = (cfg.rank, cfg.range_size, cfg.core_size);
    let constants = theory_constants(cfg.row_ratio, cfg.core_ratio, s, k, r)?;
    let counts = cfg.sample_counts(shape.0, shape.1);
    let tail_fro = spec.tail_fro(r);
    let tail_op = spec.tail_op(r);
    let c = &constants;
    Ok(TheoryReport {
        constants: *c,
        tail_fro,
        tail_op,
        incoherence: *inc,
        bound_range: (c.c1 + 1.0) * tail_fro + c.c2 * tail_op,
        bound_initial: c.c3 * tail_fro + c.c4 * tail_op,
        bound_final: (2.0 * c.c3 + 1.0) * tail_fro + 2.0 * c.c4 * tail_op,
        probability_floor_range: probability_floor_range(r, k),
        probability_floor_core: probability_floor_core(k, s),
        sample_floors: SampleFloors {
            rows: SampleFloor::new(sample_floor(inc.mu, r), counts.rows),
            cols: SampleFloor::new(sample_floor(inc.nu, r), counts.cols),
            core_rows: SampleFloor::new(sample_floor(inc.mu_prime, k), counts.core_rows),
            core_cols: SampleFloor::new(sample_floor(inc.nu_prime, k), counts.core_cols),
        },
    })
}

/// Empirical frequency with which the range and core bounds hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub trials: usize,
    /// Trials where the range bound held.
    pub range_passes: usize,
    /// Among those, trials where the initial-approximation bound held.
    pub initial_passes: usize,
    /// Among those, trials where the final rank-r bound held.
    pub final_passes: usize,
    pub range_rate: f64,
    /// Conditioned on the range bound holding, as the core bound assumes.
    pub initial_rate: f64,
    pub final_rate: f64,
    /// Largest observed ratio of error to bound, per bound.
    pub worst_range_ratio: f64,
    pub worst_initial_ratio: f64,
    pub worst_final_ratio: f64,
    /// Bounds evaluated with the largest `μ′`, `ν′` seen across trials.
    pub report: TheoryReport,
}

/// Runs `trials` independent sketches of `a` (trial `t` on stream
/// `cfg.stream + t`) and counts how often each bound holds.
pub fn theorem_coverage(a: &DenseMatrix, cfg: &SketchConfig, trials: usize) -> Result<CoverageReport> {
    ensure_arg!(trials >= 1, "at least one trial is needed");
    let r = cfg.rank;
    theory_constants(cfg.row_ratio, cfg.core_ratio, cfg.core_size, cfg.range_size, r)?;
    let dec = svd(a, None)?;
    let spec = SpectrumSummary::new(dec.sigma.clone())?;
    let mu = incoherence(&dec.u.columns(0..r), r)?;
    let nu = incoherence(&dec.v.columns(0..r), r)?;
    // The bounds themselves do not depend on the coherences; only the sample
    // floors do, and those are filled in after the trials.
    let bounds = evaluate_bounds(&spec, &IncoherenceStats { mu, nu, mu_prime: 1.0, nu_prime: 1.0 }, cfg, a.shape())?;

    let (mut range_passes, mut initial_passes, mut final_passes) = (0, 0, 0);
    let (mut worst_range, mut worst_initial, mut worst_final) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut mu_prime, mut nu_prime) = (1.0_f64, 1.0_f64);
    // Rounding slack so a zero bound (rank(A) <= r) is not failed by 1e-15 residue.
    let slack = 1e-12 * spec.total_fro();
    let ratio = |err: f64, bound: f64| if bound > 0.0 { err / bound } else { 0.0 };

    for t in 0..trials {
        let trial_cfg = cfg.clone().with_stream(cfg.stream.wrapping_add(t as u64));
        let sk = build_core_sketches(a, &trial_cfg)?;
        let (q, p) = range_bases(&sk)?;
        let k = q.ncols();
        mu_prime = mu_prime.max(incoherence(&q, k)?);
        nu_prime = nu_prime.max(incoherence(&p, k)?);

        let left = a.sub(&q.matmul(&q.t_matmul(a)?)?)?.frobenius_norm();
        let right = a.sub(&a.matmul(&p)?.matmul_t(&p)?)?.frobenius_norm();
        let range_err = left.max(right);
        worst_range = worst_range.max(ratio(range_err, bounds.bound_range));
        if range_err > bounds.bound_range + slack {
            continue;
        }
        range_passes += 1;

        let (core, warnings) = solve_core(&sk, &q, &p)?;
        let approx = ApproxFactors { q, core, p, warnings };
        let initial_err = a.sub(&approx.reconstruct())?.frobenius_norm();
        let final_err = a.sub(&truncate(&approx, r)?.reconstruct())?.frobenius_norm();
        worst_initial = worst_initial.max(ratio(initial_err, bounds.bound_initial));
        worst_final = worst_final.max(ratio(final_err, bounds.bound_final));
        if initial_err <= bounds.bound_initial + slack {
            initial_passes += 1;
        }
        if final_err <= bounds.bound_final + slack {
            final_passes += 1;
        }
    }

    let report = evaluate_bounds(&spec, &IncoherenceStats { mu, nu, mu_prime, nu_prime }, cfg, a.shape())?;
    let conditioned = |passes: usize| if range_passes == 0 { 0.0 } else { passes as f64 / range_passes as f64 };
    Ok(CoverageReport {
        trials,
        range_passes,
        initial_passes,
        final_passes,
        range_rate: range_passes as f64 / trials as f64,
        initial_rate: conditioned(initial_passes),
        final_rate: conditioned(final_passes),
        worst_range_ratio: worst_range,
        worst_initial_ratio: worst_initial,
        worst_final_ratio: worst_final,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 40-digit evaluation of the same formulas.
    #[test]
    #[allow(clippy::excessive_precision)]
    fn constants_match_high_precision_values() {
        let c = theory_constants(0.4, 0.4, 163, 81, 20).unwrap();
        assert!((c.c1 - 17.012944690739457).abs() <= 1e-12 * c.c1);
        assert!((c.c2 - 9.7065484759124729).abs() <= 1e-12 * c.c2);
        assert!((c.cqsk - 1268.5760506109619).abs() <= 1e-12 * c.cqsk);
        assert!((c.c3 - 37405.55144544228).abs() <= 1e-12 * c.c3);
        assert!((c.c4 - 21341.325971103381).abs() <= 1e-12 * c.c4);

        let c = theory_constants(0.5, 0.5, 51, 25, 6).unwrap();
        assert!((c.c1 - 19.075947531581124).abs() <= 1e-12 * c.c1);
        assert!((c.c2 - 16.766555531269277).abs() <= 1e-12 * c.c2);
        assert!((c.cqsk - 2139.5645283646398).abs() <= 1e-12 * c.cqsk);
        assert!((c.c3 - 70719.281358892513).abs() <= 1e-12 * c.c3);
        assert!((c.c4 - 62157.790907755149).abs() <= 1e-12 * c.c4);
    }

    #[test]
    fn constants_shrink_with_p_and_share_a_factor() {
        for (k, r) in [(13, 3), (25, 6), (81, 20)] {
            let s = 2 * k + 1;
            let hi = theory_constants(0.8, 0.8, s, k, r).unwrap();
            let lo = theory_constants(0.2, 0.8, s, k, r).unwrap();
            assert!(hi.c1 < lo.c1 && hi.c2 < lo.c2);
            assert!((hi.c4 / hi.c3 - hi.c2 / hi.c1).abs() <= 1e-14 * hi.c2 / hi.c1);
        }
    }

    #[test]
    fn hypotheses_are_enforced() {
        let msg = |r: Result<TheoryConstants>| r.unwrap_err().to_string();
        assert!(msg(theory_constants(0.4, 0.4, 30, 10, 7)).contains("k >= r + 4"));
        assert!(msg(theory_constants(0.4, 0.4, 12, 10, 2)).contains("s >= k + 4"));
        assert!(msg(theory_constants(0.5, 0.4, 30, 10, 2)).contains("p <= q"));
    }

    #[test]
    fn probability_floor_arithmetic() {
        assert!((probability_floor_range(8, 20) - (1.0 - 4.0 / 512.0 - 4.0 / 8000.0)).abs() < 1e-15);
        assert!((probability_floor_range(8, 20) - 0.9917).abs() < 1e-4);
    }

    #[test]
    fn zero_tail_gives_zero_bounds() {
        let spec = SpectrumSummary::new(vec![5.0, 4.0, 0.0, 0.0]).unwrap();
        let inc = IncoherenceStats { mu: 1.0, nu: 1.0, mu_prime: 1.0, nu_prime: 1.0 };
        let cfg = SketchConfig::new(2).with_ratios(0.5, 0.5);
        let rep = evaluate_bounds(&spec, &inc, &cfg, (100, 80)).unwrap();
        assert_eq!((rep.bound_range, rep.bound_initial, rep.bound_final), (0.0, 0.0, 0.0));

        let spec = SpectrumSummary::new(vec![5.0, 4.0, 1.0, 0.5]).unwrap();
        let rep = evaluate_bounds(&spec, &inc, &cfg, (100, 80)).unwrap();
        assert!(rep.bound_final >= rep.bound_initial && rep.bound_initial > rep.bound_range);
        assert_eq!(rep.sample_floors.rows.available, 50);
        assert!((rep.sample_floors.rows.required - 16.0 * 2f64.ln()).abs() < 1e-12);
    }
}
