//! The work behind each CLI verb, callable without going through argv.

use std::path::Path;

use serde_json::json;
use sketchy_core::diagnostics::{
    approx_error, check_lemma1, check_lemma3, check_lemma4, check_lemma5, check_lemma7, evaluate_bounds, incoherence,
    incoherence_stats, sample_floor, scree_curve, theorem_coverage, CoverageReport, SpectrumSummary,
};
use sketchy_core::matcore::{gaussian_map, sample_without_replacement, thin_qr};
use sketchy_core::sketch::{build_core_sketches, recover};
use sketchy_core::synth::{generate, yale_like_spec, Spectrum, SynthSpec};
use sketchy_core::{DenseMatrix, RandomStream, SketchConfig};

use crate::error::{CliError, CliResult};
use crate::io::{save_matrix, Format};
use crate::method::Method;
use crate::report::*;

/// Default cap on `rows * cols` for anything that needs the whole matrix in
/// dense form beyond the sketches: full SVDs and synthetic benchmark inputs.
pub const DEFAULT_MAX_DENSE: usize = 10_000_000;

/// Sketch parameters as given on the command line; unset sizes follow
/// `k = 4r + 1`, `s = 2k + 1`, `q = p`, and `p` defaults to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SketchArgs {
    pub rank: usize,
    pub k: Option<usize>,
    pub s: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub seed: u64,
}

impl SketchArgs {
    pub fn new(rank: usize) -> Self {
        Self { rank, k: None, s: None, p: None, q: None, seed: 0 }
    }

    pub fn config(&self) -> SketchConfig {
        self.config_at(self.p.unwrap_or(1.0))
    }

    /// Configuration with row ratio `p`; q follows p unless set.
    pub fn config_at(&self, p: f64) -> SketchConfig {
        let k = self.k.unwrap_or(4 * self.rank + 1);
        let s = self.s.unwrap_or(2 * k + 1);
        SketchConfig::new(self.rank).with_sizes(k, s).with_ratios(p, self.q.unwrap_or(p)).with_seed(self.seed)
    }
}

fn guard_dense(shape: (usize, usize), max_dense: usize, what: &str) -> CliResult<()> {
    let entries = shape.0.saturating_mul(shape.1);
    if entries > max_dense {
        return Err(CliError::Usage(format!(
            "refusing {what} of a {}x{} matrix: {entries} entries exceeds --max-dense {max_dense}",
            shape.0, shape.1
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct ApproxOptions {
    pub trials: usize,
    pub incoherence: bool,
    pub bounds: bool,
    pub max_dense: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self { trials: 1, incoherence: false, bounds: false, max_dense: DEFAULT_MAX_DENSE }
    }
}

/// Runs `method` for `opts.trials` trials on derived substreams and
/// aggregates the errors and timings.
pub fn approx(a: &DenseMatrix, method: Method, cfg: &SketchConfig, opts: &ApproxOptions) -> CliResult<RunReport> {
    if opts.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    // Only the core method samples; the others always read the whole matrix.
    let cfg = if method.uses_ratios() { cfg.clone() } else { cfg.full() };
    if matches!(method, Method::SketchyCoreSvd | Method::SketchySvd) {
        cfg.validate(a.nrows(), a.ncols())?;
    }
    let mut errs = Vec::with_capacity(opts.trials);
    let mut phases = Vec::new();
    let mut totals = Vec::with_capacity(opts.trials);
    let mut warnings = Vec::new();
    for t in 0..opts.trials {
        let run = method.run(a, &cfg, t as u64)?;
        errs.push(approx_error(a, &run.factors)?);
        totals.push(run.total);
        if let Some(timings) = &run.timings {
            phases.push(PhaseSeconds::of(timings));
        }
        for w in run.warnings {
            warnings.push(format!("trial {t}: {}", serde_json::to_string(&w).expect("warning serializes")));
        }
    }

    let shape = a.shape();
    let dense_ok = shape.0.saturating_mul(shape.1) <= opts.max_dense;
    let spectrum = if dense_ok || opts.bounds { Some(guard_then_spectrum(a, opts.max_dense)?) } else { None };
    let scree_at_rank = match &spectrum {
        Some(spec) => Some(scree_curve(spec.singular_values())?[cfg.rank.min(spec.singular_values().len())]),
        None => None,
    };

    let needs_bases = opts.incoherence || opts.bounds;
    let stats = if needs_bases {
        if !matches!(method, Method::SketchyCoreSvd | Method::SketchySvd) {
            return Err(CliError::Usage(format!(
                "incoherence and bounds need the range bases of sketchy_core_svd or sketchy_svd, not {method}"
            )));
        }
        guard_dense(shape, opts.max_dense, "a full SVD")?;
        let factors = recover(&build_core_sketches(a, &cfg)?)?;
        Some(incoherence_stats(a, cfg.rank, &factors)?)
    } else {
        None
    };
    let bounds = match (opts.bounds, &spectrum, &stats) {
        (true, Some(spec), Some(inc)) => Some(evaluate_bounds(spec, inc, &cfg, shape)?),
        _ => None,
    };

    Ok(RunReport {
        schema: schema_name("run-report"),
        schema_version: SCHEMA_VERSION,
        method,
        shape: [shape.0, shape.1],
        config: ConfigEcho::of(&cfg),
        trials: opts.trials,
        err: TrialStats::of(&errs),
        err_per_trial: errs,
        phase_seconds: (!phases.is_empty()).then(|| PhaseSeconds::mean(&phases)),
        total_seconds: TrialStats::of(&totals),
        scree_at_rank,
        incoherence: if opts.incoherence { stats } else { None },
        bounds,
        warnings,
    })
}

fn guard_then_spectrum(a: &DenseMatrix, max_dense: usize) -> CliResult<SpectrumSummary> {
    guard_dense(a.shape(), max_dense, "a full SVD")?;
    Ok(SpectrumSummary::of_matrix(a)?)
}

/// Default `p` values for `compare`.
pub const DEFAULT_P_SWEEP: [f64; 3] = [0.3, 0.35, 0.4];

/// One row per (method, p). Methods that read the whole matrix do not depend
/// on p; they run once and their row is repeated for each p.
pub fn compare(
    a: &DenseMatrix,
    methods: &[Method],
    sweep: &[f64],
    args: &SketchArgs,
    opts: &ApproxOptions,
) -> CliResult<CompareReport> {
    if sweep.is_empty() {
        return Err(CliError::Usage("the p sweep is empty".into()));
    }
    let plain = ApproxOptions { incoherence: false, bounds: false, max_dense: 0, ..*opts };
    let mut rows = Vec::new();
    for &method in methods {
        let fixed =
            if method.uses_ratios() { None } else { Some(approx(a, method, &args.config_at(sweep[0]), &plain)?) };
        for &p in sweep {
            let report = match &fixed {
                Some(r) => r.clone(),
                None => approx(a, method, &args.config_at(p), &plain)?,
            };
            rows.push(CompareRow {
                method,
                p,
                q: if method.uses_ratios() { report.config.q } else { 1.0 },
                k: report.config.k,
                s: report.config.s,
                trials: report.trials,
                err_mean: report.err.mean,
                err_std: report.err.std,
                sketch_build_seconds: report.phase_seconds.map(|ph| ph.sketch_build),
                factorization_seconds: report.phase_seconds.map(|ph| ph.factorization()),
                total_seconds: report.total_seconds.mean,
            });
        }
    }
    let shape = a.shape();
    let scree_at_rank = if shape.0.saturating_mul(shape.1) <= opts.max_dense {
        let spec = SpectrumSummary::of_matrix(a)?;
        Some(scree_curve(spec.singular_values())?[args.rank.min(spec.singular_values().len())])
    } else {
        None
    };
    Ok(CompareReport {
        schema: schema_name("compare-report"),
        schema_version: SCHEMA_VERSION,
        shape: [shape.0, shape.1],
        r: args.rank,
        seed: args.seed,
        trials: opts.trials,
        scree_at_rank,
        rows,
    })
}

/// Exact `scree(r)` for `r = 0..=r_max` from a full SVD.
pub fn scree(a: &DenseMatrix, r_max: Option<usize>, max_dense: usize) -> CliResult<ScreeReport> {
    let spec = guard_then_spectrum(a, max_dense)?;
    let curve = scree_curve(spec.singular_values())?;
    let last = r_max.unwrap_or(curve.len() - 1).min(curve.len() - 1);
    Ok(ScreeReport {
        schema: schema_name("scree-report"),
        schema_version: SCHEMA_VERSION,
        shape: [a.nrows(), a.ncols()],
        rows: curve[..=last].iter().enumerate().map(|(r, &scree)| ScreeRow { r, scree }).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma1,
    Lemma3,
    Lemma4,
    Lemma5,
    Lemma7,
    Thm1,
    Thm2,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma3 => "lemma3",
            Suite::Lemma4 => "lemma4",
            Suite::Lemma5 => "lemma5",
            Suite::Lemma7 => "lemma7",
            Suite::Thm1 => "thm1",
            Suite::Thm2 => "thm2",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Lemma1,
                Suite::Lemma3,
                Suite::Lemma4,
                Suite::Lemma5,
                Suite::Lemma7,
                Suite::Thm1,
                Suite::Thm2,
            ],
            s => vec![s],
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides each suite's default trial count.
    pub trials: Option<usize>,
    /// Matrix for the theorem suites; defaults to the 400 x 300 Yale-like one.
    pub matrix: Option<DenseMatrix>,
    /// Sketch parameters for the theorem suites.
    pub sketch: SketchArgs,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        let sketch = SketchArgs { rank: 6, k: Some(25), s: Some(51), p: Some(0.5), q: Some(0.5), seed };
        Self { seed, trials: None, matrix: None, sketch }
    }
}

pub const LEMMA4_TOLERANCE_SIGMAS: f64 = 3.0;
pub const LEMMA5_RELATIVE_TOLERANCE: f64 = 0.05;
pub const LEMMA3_RELATIVE_SLACK: f64 = 1e-12;
pub const LEMMA7_MAX_RESIDUAL: f64 = 1e-10;
pub const LEMMA7_MIN_CONTROL_RESIDUAL: f64 = 1e-6;
pub const LEMMA1_MIN_PASS_RATE: f64 = 0.95;

/// Runs the requested suites; `passed` is true iff every suite passed.
pub fn verify(suite: Suite, opts: &VerifyOptions) -> CliResult<VerifyReport> {
    let mut results = Vec::new();
    let mut coverage: Option<CoverageReport> = None;
    for s in suite.expand() {
        let result = match s {
            Suite::Lemma1 => verify_lemma1(opts)?,
            Suite::Lemma3 => verify_lemma3(opts)?,
            Suite::Lemma4 => verify_lemma4(opts)?,
            Suite::Lemma5 => verify_lemma5(opts)?,
            Suite::Lemma7 => verify_lemma7(opts)?,
            Suite::Thm1 | Suite::Thm2 => {
                if coverage.is_none() {
                    coverage = Some(run_coverage(opts)?);
                }
                coverage_result(s, coverage.as_ref().expect("coverage was just computed"))
            }
            Suite::All => unreachable!("expanded above"),
        };
        results.push(result);
    }
    Ok(VerifyReport {
        schema: schema_name("verify-report"),
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        passed: results.iter().all(|r| r.passed),
        suites: results,
    })
}

fn suite_result(suite: Suite, passed: bool, summary: String, details: serde_json::Value) -> SuiteResult {
    SuiteResult { suite: suite.name().to_string(), passed, summary, details }
}

fn verify_lemma1(opts: &VerifyOptions) -> CliResult<SuiteResult> {
    let (big_n, r) = (2000, 8);
    let trials = opts.trials.unwrap_or(200);
    let rng = RandomStream::new(opts.seed, 1);
    let basis = thin_qr(&gaussian_map(big_n, r, rng.fork(1))?)?.0;
    let mu = incoherence(&basis, r)?;
    let n = (sample_floor(mu, r).ceil() as usize).min(big_n);
    let rep = check_lemma1(&basis, n, trials, rng.fork(2))?;
    let passed = rep.pass_rate.rate() >= LEMMA1_MIN_PASS_RATE;
    let summary = format!(
        "N = {big_n}, r = {r}, mu = {mu:.3}, n = {n}: both bounds held in {}/{} trials (need >= {LEMMA1_MIN_PASS_RATE})",
        rep.pass_rate.passes, rep.pass_rate.trials
    );
    Ok(suite_result(Suite::Lemma1, passed, summary, serde_json::to_value(rep).expect("report serializes")))
}

fn verify_lemma3(opts: &VerifyOptions) -> CliResult<SuiteResult> {
    let (m, n, r, k, cols) = (50, 40, 5, 10, 20);
    let trials = opts.trials.unwrap_or(100);
    let rng = RandomStream::new(opts.seed, 3);
    let mut holds = 0;
    let mut worst = 0.0_f64;
    for t in 0..trials as u64 {
        let a = gaussian_map(m, n, rng.fork(3 * t))?;
        let theta = sample_without_replacement(cols, n, rng.fork(3 * t + 1))?;
        let omega = gaussian_map(k, cols, rng.fork(3 * t + 2))?;
        let sides = check_lemma3(&a, r, &theta, &omega)?;
        if sides.holds(LEMMA3_RELATIVE_SLACK, a.frobenius_norm_sq()) {
            holds += 1;
        }
        if sides.rhs > 0.0 {
            worst = worst.max(sides.lhs / sides.rhs);
        }
    }
    let summary =
        format!("{m}x{n}, r = {r}: inequality held in {holds}/{trials} instances, worst lhs/rhs = {worst:.4}");
    let details = json!({ "instances": trials, "holds": holds, "worst_ratio": worst });
    Ok(suite_result(Suite::Lemma3, holds == trials, summary, details))
}

/// Allowed violation rate for a check promised to fail with probability at
/// most `rate`: `rate + 3 sqrt(rate / trials)`.
pub fn violation_allowance(rate: f64, trials: usize) -> f64 {
    rate + LEMMA4_TOLERANCE_SIGMAS * (rate / trials as f64).sqrt()
}

fn verify_lemma4(opts: &VerifyOptions) -> CliResult<SuiteResult> {
    let (k, r) = (20, 8);
    let trials = opts.trials.unwrap_or(10_000);
    let rep = check_lemma4(k, r, trials, RandomStream::new(opts.seed, 4))?;
    let violation = 1.0 - rep.pass_rate.rate();
    let allowed = violation_allowance(1.0 / (k as f64).powi(3), trials);
    let summary =
        format!("k = {k}, r = {r}: violation rate {violation:.2e} over {trials} draws (allowed {allowed:.2e})");
    Ok(suite_result(
        Suite::Lemma4,
        violation <= allowed,
        summary,
        serde_json::to_value(rep).expect("report serializes"),
    ))
}

fn verify_lemma5(opts: &VerifyOptions) -> CliResult<SuiteResult> {
    let trials = opts.trials.unwrap_or(10_000);
    let rng = RandomStream::new(opts.seed, 5);
    let s = gaussian_map(3, 5, rng.fork(1))?;
    let t = gaussian_map(4, 2, rng.fork(2))?;
    let rep = check_lemma5(&s, &t, trials, rng.fork(3))?;
    let summary = format!(
        "S 3x5, T 4x2: mean {:.4} vs target {:.4} ({:.2}% off, allowed {:.0}%)",
        rep.mean,
        rep.target,
        100.0 * rep.deviation,
        100.0 * LEMMA5_RELATIVE_TOLERANCE
    );
    let passed = rep.deviation <= LEMMA5_RELATIVE_TOLERANCE;
    Ok(suite_result(Suite::Lemma5, passed, summary, serde_json::to_value(rep).expect("report serializes")))
}

fn verify_lemma7(opts: &VerifyOptions) -> CliResult<SuiteResult> {
    let instances = opts.trials.unwrap_or(10);
    let rng = RandomStream::new(opts.seed, 7);
    let (mut worst, mut weakest_control) = (0.0_f64, f64::INFINITY);
    for t in 0..instances as u64 {
        let a = gaussian_map(80, 60, rng.fork(2 * t))?;
        let cfg = SketchConfig::new(2).with_ratios(0.5, 0.6).with_seed(opts.seed).with_stream(t);
        let sk = build_core_sketches(&a, &cfg)?;
        worst = worst.max(check_lemma7(&a, &recover(&sk)?, &sk)?);

        // A perturbed core sketch breaks the identity.
        let mut noisy = sk.clone();
        let noise = gaussian_map(sk.z.nrows(), sk.z.ncols(), rng.fork(2 * t + 1))?;
        noisy.z = noisy.z.add(&noise.scale(1e-3 * sk.z.frobenius_norm() / sk.z.nrows() as f64))?;
        weakest_control = weakest_control.min(check_lemma7(&a, &recover(&noisy)?, &noisy)?);
    }
    let passed = worst <= LEMMA7_MAX_RESIDUAL && weakest_control >= LEMMA7_MIN_CONTROL_RESIDUAL;
    let summary = format!(
        "{instances} instances: worst residual {worst:.2e} (max {LEMMA7_MAX_RESIDUAL:.0e}), \
         perturbed control >= {weakest_control:.2e} (min {LEMMA7_MIN_CONTROL_RESIDUAL:.0e})"
    );
    let details = json!({ "instances": instances, "worst_residual": worst, "min_control_residual": weakest_control });
    Ok(suite_result(Suite::Lemma7, passed, summary, details))
}

fn run_coverage(opts: &VerifyOptions) -> CliResult<CoverageReport> {
    let a = match &opts.matrix {
        Some(a) => a.clone(),
        None => generate(&yale_like_spec().with_shape(400, 300).with_seed(opts.seed))?,
    };
    let cfg = opts.sketch.config();
    cfg.validate(a.nrows(), a.ncols())?;
    Ok(theorem_coverage(&a, &cfg, opts.trials.unwrap_or(500))?)
}

fn coverage_result(suite: Suite, cov: &CoverageReport) -> SuiteResult {
    let rep = &cov.report;
    let floors = &rep.sample_floors;
    let (passed, summary) = if suite == Suite::Thm1 {
        let floor = rep.probability_floor_range;
        (
            cov.range_rate >= floor,
            format!(
                "range bound held in {}/{} trials ({:.4}, floor {floor:.4}); sample floors m, n {}",
                cov.range_passes,
                cov.trials,
                cov.range_rate,
                if floors.range_satisfied() { "met" } else { "NOT met" }
            ),
        )
    } else {
        let floor = rep.probability_floor_core;
        (
            cov.final_rate >= floor,
            format!(
                "final bound held in {}/{} range-passing trials ({:.4}, floor {floor:.4}); sample floors m', n' {}",
                cov.final_passes,
                cov.range_passes,
                cov.final_rate,
                if floors.core_satisfied() { "met" } else { "NOT met" }
            ),
        )
    };
    suite_result(suite, passed, summary, serde_json::to_value(cov).expect("report serializes"))
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub rows: usize,
    pub cols: usize,
    pub sketch: SketchArgs,
    pub sweep: Vec<f64>,
    pub reps: usize,
    pub max_dense: usize,
}

/// Synthetic benchmark input: a polynomially decaying spectrum of length
/// `min(M, N, 2k)`, which keeps generation cheap at large shapes.
pub fn bench_matrix(opts: &BenchOptions) -> CliResult<DenseMatrix> {
    guard_dense((opts.rows, opts.cols), opts.max_dense, "a dense benchmark matrix")?;
    let k = opts.sketch.config().range_size;
    let len = opts.rows.min(opts.cols).min(2 * k);
    Ok(generate(
        &SynthSpec::new(opts.rows, opts.cols, Spectrum::Polynomial { len, exponent: 1.0 }).with_seed(opts.seed()),
    )?)
}

impl BenchOptions {
    fn seed(&self) -> u64 {
        self.sketch.seed
    }
}

/// Per-phase medians over `reps` runs: the core method at every p in the
/// sweep (q = p unless set), then the full method once.
pub fn bench(a: &DenseMatrix, opts: &BenchOptions) -> CliResult<BenchReport> {
    if opts.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    guard_dense(a.shape(), opts.max_dense, "benchmarking")?;
    let mut rows = Vec::new();
    let mut cells: Vec<(Method, SketchConfig)> =
        opts.sweep.iter().map(|&p| (Method::SketchyCoreSvd, opts.sketch.config_at(p))).collect();
    cells.push((Method::SketchySvd, opts.sketch.config_at(1.0).full()));
    for (method, cfg) in cells {
        cfg.validate(a.nrows(), a.ncols())?;
        let mut phases = Vec::with_capacity(opts.reps);
        for rep in 0..opts.reps {
            let run = method.run(a, &cfg, rep as u64)?;
            phases.push(PhaseSeconds::of(&run.timings.expect("sketch methods report phases")));
        }
        let med = PhaseSeconds::median(&phases);
        rows.push(BenchRow {
            method,
            p: cfg.row_ratio,
            q: cfg.core_ratio,
            reps: opts.reps,
            sketch_build_seconds: med.sketch_build,
            qr_seconds: med.qr,
            core_seconds: med.core,
            truncate_seconds: med.truncate,
            factorization_seconds: med.factorization(),
        });
    }
    let cfg = opts.sketch.config();
    Ok(BenchReport {
        schema: schema_name("bench-report"),
        schema_version: SCHEMA_VERSION,
        shape: [a.nrows(), a.ncols()],
        r: cfg.rank,
        k: cfg.range_size,
        s: cfg.core_size,
        seed: opts.seed(),
        rows,
    })
}

/// Generates the matrix described by `spec` and writes it to `output`.
pub fn synth(spec: &SynthSpec, output: &Path, format: Option<Format>, max_dense: usize) -> CliResult<DenseMatrix> {
    guard_dense((spec.rows, spec.cols), max_dense, "generating")?;
    let a = generate(spec)?;
    save_matrix(output, &a, format)?;
    Ok(a)
}

/// Scree value of a spec's own spectrum at rank `r`, without generating it.
pub fn spec_scree(spec: &SynthSpec, r: usize) -> CliResult<f64> {
    let values = spec.validate()?;
    Ok(scree_curve(&values)?[r.min(values.len())])
}
