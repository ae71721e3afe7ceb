use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::{SampleCounts, SketchConfig};
use super::source::MatrixSource;
use crate::error::{ensure_arg, Result};
use crate::matcore::{pseudo_inverse_with_rank, sample_without_replacement, svd, thin_qr};
use crate::matcore::{DenseMatrix, IndexSet, RandomStream};

// Substream labels. Each random object owns one, so the draws do not depend
// on the order in which the sketches are built.
const ROWS_LABEL: u64 = 1;
const COLS_LABEL: u64 = 2;
const CORE_ROWS_LABEL: u64 = 3;
const CORE_COLS_LABEL: u64 = 4;
const GAMMA_LABEL: u64 = 5;
const OMEGA_LABEL: u64 = 6;
const PHI_LABEL: u64 = 7;
const PSI_LABEL: u64 = 8;

/// The three sketches plus everything the core solve needs from the build.
#[derive(Clone, Debug)]
pub struct CoreSketch {
    /// `X = Γ A^(Δ,:)`, `k x N`.
    pub x: DenseMatrix,
    /// `Y = A^(:,Θ) Ωᵀ`, `M x k`.
    pub y: DenseMatrix,
    /// `Z = Φ A^(Δ′,Θ′) Ψᵀ`, `s x s`.
    pub z: DenseMatrix,
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub core_rows: IndexSet,
    pub core_cols: IndexSet,
    /// `s x m′`.
    pub phi: DenseMatrix,
    /// `s x n′`.
    pub psi: DenseMatrix,
    pub config: SketchConfig,
    pub shape: (usize, usize),
}

/// Which side of the core solve lost rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreSide {
    Left,
    Right,
}

/// Non-fatal conditions met while recovering the factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RecoverWarning {
    /// `Φ Q^(Δ′,:)` or `Ψ P^(Θ′,:)` had numerical rank below `k`.
    RankDeficientCore { side: CoreSide, rank: usize, expected: usize },
}

/// Initial approximation `Â = Q C Pᵀ`.
#[derive(Clone, Debug)]
pub struct ApproxFactors {
    /// `M x k`, orthonormal columns.
    pub q: DenseMatrix,
    /// `k x k`.
    pub core: DenseMatrix,
    /// `N x k`, orthonormal columns.
    pub p: DenseMatrix,
    pub warnings: Vec<RecoverWarning>,
}

impl ApproxFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q.matmul(&self.core).and_then(|qc| qc.matmul_t(&self.p)).expect("factor shapes agree by construction")
    }
}

/// Rank-r output `U diag(sigma) Vᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankRFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl RankRFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_columns(&self.sigma).matmul_t(&self.v).expect("factor shapes agree by construction")
    }
}

/// Wall time spent in each phase of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub sketch_build: Duration,
    pub qr: Duration,
    pub core: Duration,
    pub truncate: Duration,
}

impl PhaseTimings {
    /// Everything except the truncation, which is only needed to report errors.
    pub fn factorization(&self) -> Duration {
        self.sketch_build + self.qr + self.core
    }

    pub fn total(&self) -> Duration {
        self.factorization() + self.truncate
    }
}

/// Result of a full pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub factors: RankRFactors,
    pub timings: PhaseTimings,
    pub warnings: Vec<RecoverWarning>,
}

struct Samples {
    rows: IndexSet,
    cols: IndexSet,
    core_rows: IndexSet,
    core_cols: IndexSet,
}

fn draw_samples(base: RandomStream, counts: SampleCounts, shape: (usize, usize)) -> Result<Samples> {
    let (m, n) = shape;
    Ok(Samples {
        rows: sample_without_replacement(counts.rows, m, base.fork(ROWS_LABEL))?,
        cols: sample_without_replacement(counts.cols, n, base.fork(COLS_LABEL))?,
        core_rows: sample_without_replacement(counts.core_rows, m, base.fork(CORE_ROWS_LABEL))?,
        core_cols: sample_without_replacement(counts.core_cols, n, base.fork(CORE_COLS_LABEL))?,
    })
}

/// `Φ B Ψᵀ`, multiplying in whichever order needs fewer flops.
fn two_sided(phi: &DenseMatrix, block: &DenseMatrix, psi: &DenseMatrix) -> Result<DenseMatrix> {
    let (mb, nb) = block.shape();
    if nb <= mb {
        phi.matmul(block)?.matmul_t(psi)
    } else {
        phi.matmul(&block.matmul_t(psi)?)
    }
}

fn core_sketch<S: MatrixSource + ?Sized>(
    src: &S,
    base: RandomStream,
    config: &SketchConfig,
    rows: &IndexSet,
    cols: &IndexSet,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let s = config.core_size;
    let phi = config.map.draw(s, rows.len(), base.fork(PHI_LABEL))?;
    let psi = config.map.draw(s, cols.len(), base.fork(PSI_LABEL))?;
    let z = two_sided(&phi, src.block(rows, cols)?.as_ref(), &psi)?;
    Ok((z, phi, psi))
}

/// Builds `X`, `Y` and `Z` from uniformly subsampled rows and columns.
///
/// `A` is read only on `Δ` rows, `Θ` columns and the `(Δ′, Θ′)` block.
/// The range maps `Γ`, `Ω` are dropped afterwards; `Φ`, `Ψ` are kept for
/// the core solve.
pub fn build_core_sketches<S: MatrixSource + ?Sized>(src: &S, config: &SketchConfig) -> Result<CoreSketch> {
    let shape = src.shape();
    let counts = config.validate(shape.0, shape.1)?;
    let base = config.random_stream();
    let samples = draw_samples(base, counts, shape)?;
    let k = config.range_size;

    let gamma = config.map.draw(k, samples.rows.len(), base.fork(GAMMA_LABEL))?;
    let x = gamma.matmul(src.rows(&samples.rows)?.as_ref())?;
    drop(gamma);

    let omega = config.map.draw(k, samples.cols.len(), base.fork(OMEGA_LABEL))?;
    let y = src.cols(&samples.cols)?.matmul_t(&omega)?;
    drop(omega);

    let (z, phi, psi) = core_sketch(src, base, config, &samples.core_rows, &samples.core_cols)?;

    Ok(CoreSketch {
        x,
        y,
        z,
        rows: samples.rows,
        cols: samples.cols,
        core_rows: samples.core_rows,
        core_cols: samples.core_cols,
        phi,
        psi,
        config: config.clone(),
        shape,
    })
}

/// Sketches of the whole matrix: `build_core_sketches` with `p = q = 1`.
pub fn build_full_sketches<S: MatrixSource + ?Sized>(src: &S, config: &SketchConfig) -> Result<CoreSketch> {
    build_core_sketches(src, &config.full())
}

/// Orthonormal bases `(Q, P)` from `Y = Q R₂` and `Xᵀ = P R₁`.
pub fn range_bases(sk: &CoreSketch) -> Result<(DenseMatrix, DenseMatrix)> {
    let (q, _) = thin_qr(&sk.y)?;
    let (p, _) = thin_qr(&sk.x.transpose())?;
    Ok((q, p))
}

/// `C = (Φ Q^(Δ′,:))† Z ((Ψ P^(Θ′,:))†)ᵀ`.
pub fn solve_core(sk: &CoreSketch, q: &DenseMatrix, p: &DenseMatrix) -> Result<(DenseMatrix, Vec<RecoverWarning>)> {
    let k = q.ncols();
    let left = sk.phi.matmul(&q.select_rows(&sk.core_rows)?)?;
    let right = sk.psi.matmul(&p.select_rows(&sk.core_cols)?)?;
    let (left_pinv, left_rank) = pseudo_inverse_with_rank(&left, None)?;
    let (right_pinv, right_rank) = pseudo_inverse_with_rank(&right, None)?;
    let mut warnings = Vec::new();
    if left_rank < k {
        warnings.push(RecoverWarning::RankDeficientCore { side: CoreSide::Left, rank: left_rank, expected: k });
    }
    if right_rank < k {
        warnings.push(RecoverWarning::RankDeficientCore { side: CoreSide::Right, rank: right_rank, expected: k });
    }
    let core = left_pinv.matmul(&sk.z)?.matmul_t(&right_pinv)?;
    Ok((core, warnings))
}

fn check_consistent(sk: &CoreSketch) -> Result<()> {
    let (m, n) = sk.shape;
    let (k, s) = (sk.config.range_size, sk.config.core_size);
    ensure_arg!(sk.x.shape() == (k, n), "X must be {k}x{n}, got {:?}", sk.x.shape());
    ensure_arg!(sk.y.shape() == (m, k), "Y must be {m}x{k}, got {:?}", sk.y.shape());
    ensure_arg!(sk.z.shape() == (s, s), "Z must be {s}x{s}, got {:?}", sk.z.shape());
    ensure_arg!(
        sk.phi.shape() == (s, sk.core_rows.len()),
        "Phi must be {s}x{}, got {:?}",
        sk.core_rows.len(),
        sk.phi.shape()
    );
    ensure_arg!(
        sk.psi.shape() == (s, sk.core_cols.len()),
        "Psi must be {s}x{}, got {:?}",
        sk.core_cols.len(),
        sk.psi.shape()
    );
    ensure_arg!(
        sk.core_rows.population() == m && sk.core_cols.population() == n,
        "core index sets do not match the {m}x{n} shape"
    );
    Ok(())
}

/// Initial approximation `Q C Pᵀ` from a sketch.
pub fn recover(sk: &CoreSketch) -> Result<ApproxFactors> {
    check_consistent(sk)?;
    let (q, p) = range_bases(sk)?;
    let (core, warnings) = solve_core(sk, &q, &p)?;
    Ok(ApproxFactors { q, core, p, warnings })
}

/// `Q [[C]]_r Pᵀ` in factored SVD form.
pub fn truncate(factors: &ApproxFactors, rank: usize) -> Result<RankRFactors> {
    let k = factors.core.nrows();
    ensure_arg!(rank <= k, "r <= k violated: r = {rank}, k = {k}");
    let dec = svd(&factors.core, Some(rank))?;
    Ok(RankRFactors { u: factors.q.matmul(&dec.u)?, sigma: dec.sigma, v: factors.p.matmul(&dec.v)? })
}

/// Subsampled sketches, then `recover` and `truncate`, timing each phase.
pub fn sketchy_core_svd<S: MatrixSource + ?Sized>(src: &S, config: &SketchConfig) -> Result<PipelineOutput> {
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let sk = build_core_sketches(src, config)?;
    timings.sketch_build = t.elapsed();

    let t = Instant::now();
    let (q, p) = range_bases(&sk)?;
    timings.qr = t.elapsed();

    let t = Instant::now();
    let (core, warnings) = solve_core(&sk, &q, &p)?;
    timings.core = t.elapsed();

    let approx = ApproxFactors { q, core, p, warnings };
    let t = Instant::now();
    let factors = truncate(&approx, config.rank)?;
    timings.truncate = t.elapsed();

    Ok(PipelineOutput { factors, timings, warnings: approx.warnings })
}

/// The full-matrix method: `sketchy_core_svd` with `p = q = 1`.
pub fn sketchy_svd<S: MatrixSource + ?Sized>(src: &S, config: &SketchConfig) -> Result<PipelineOutput> {
    sketchy_core_svd(src, &config.full())
}

/// Largest squared row norm of `basis`, scaled so a perfectly flat basis gives 1.
fn coherence_of(basis: &DenseMatrix) -> f64 {
    let (rows, k) = basis.shape();
    let max_sq = (0..rows).map(|i| basis.row(i).iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
    rows as f64 / k as f64 * max_sq
}

/// Variant that picks the core sample sizes after the range bases are known:
/// `m′ = ⌈c μ′ k ln k⌉` and `n′ = ⌈c ν′ k ln k⌉`, where `μ′`, `ν′` are the
/// measured coherences of `Q` and `P` and `c` is `oversampling`. Sizes are
/// clamped to `[s, M]` and `[s, N]`; `config.core_ratio` is ignored.
pub fn sketchy_core_svd_adaptive<S: MatrixSource + ?Sized>(
    src: &S,
    config: &SketchConfig,
    oversampling: f64,
) -> Result<PipelineOutput> {
    ensure_arg!(oversampling > 0.0 && oversampling.is_finite(), "oversampling factor must be positive");
    let (m, n) = src.shape();
    let range_config = config.clone().with_ratios(config.row_ratio, 1.0);
    let counts = range_config.validate(m, n)?;
    let base = config.random_stream();
    let k = config.range_size;
    let s = config.core_size;
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let rows = sample_without_replacement(counts.rows, m, base.fork(ROWS_LABEL))?;
    let cols = sample_without_replacement(counts.cols, n, base.fork(COLS_LABEL))?;
    let gamma = config.map.draw(k, rows.len(), base.fork(GAMMA_LABEL))?;
    let x = gamma.matmul(src.rows(&rows)?.as_ref())?;
    let omega = config.map.draw(k, cols.len(), base.fork(OMEGA_LABEL))?;
    let y = src.cols(&cols)?.matmul_t(&omega)?;
    timings.sketch_build = t.elapsed();

    let t = Instant::now();
    let (q, _) = thin_qr(&y)?;
    let (p, _) = thin_qr(&x.transpose())?;
    timings.qr = t.elapsed();

    let t = Instant::now();
    let log_k = (k as f64).ln().max(1.0);
    let size_for = |mu: f64, dim: usize| ((oversampling * mu * k as f64 * log_k).ceil() as usize).clamp(s, dim);
    let core_rows_n = size_for(coherence_of(&q), m);
    let core_cols_n = size_for(coherence_of(&p), n);
    let core_rows = sample_without_replacement(core_rows_n, m, base.fork(CORE_ROWS_LABEL))?;
    let core_cols = sample_without_replacement(core_cols_n, n, base.fork(CORE_COLS_LABEL))?;
    let (z, phi, psi) = core_sketch(src, base, config, &core_rows, &core_cols)?;
    timings.sketch_build += t.elapsed();

    let sk = CoreSketch { x, y, z, rows, cols, core_rows, core_cols, phi, psi, config: config.clone(), shape: (m, n) };
    let t = Instant::now();
    let (core, warnings) = solve_core(&sk, &q, &p)?;
    timings.core = t.elapsed();

    let approx = ApproxFactors { q, core, p, warnings };
    let t = Instant::now();
    let factors = truncate(&approx, config.rank)?;
    timings.truncate = t.elapsed();
    Ok(PipelineOutput { factors, timings, warnings: approx.warnings })
}
