//! Command-line front end: matrix file I/O, method runs, comparisons,
//! verification suites and benchmarks with JSON/CSV reports.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod method;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sketchy_core::synth::{cardiac_like_spec, video_like_spec, yale_like_spec, SynthSpec};

use args::{Cli, Command, Preset};
use commands::{ApproxOptions, BenchOptions, SketchArgs, VerifyOptions};
pub use error::{CliError, CliResult, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};
pub use method::Method;

/// What to print when neither `--json` nor `--csv` is given.
enum Primary {
    Json,
    Csv,
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    output: &args::OutputArgs,
    report: &T,
    csv: Option<String>,
    primary: Primary,
) -> CliResult<()> {
    let json = serde_json::to_string_pretty(report).expect("reports serialize to JSON") + "\n";
    if let Some(path) = &output.json {
        write_file(path, &json)?;
    }
    if let (Some(path), Some(table)) = (&output.csv, &csv) {
        write_file(path, table)?;
    }
    if output.json.is_none() && output.csv.is_none() {
        let text = match (primary, csv) {
            (Primary::Csv, Some(table)) => table,
            _ => json,
        };
        out.write_all(text.as_bytes()).map_err(|source| CliError::Output { path: "<stdout>".into(), source })?;
    }
    Ok(())
}

fn sketch_args(flags: &args::SketchFlags, p: Option<f64>) -> SketchArgs {
    SketchArgs { rank: flags.rank, k: flags.k, s: flags.s, p, q: flags.q, seed: flags.seed }
}

/// Runs one parsed command, writing reports to `out` unless redirected to
/// files. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    match cli.command {
        Command::Approx(a) => {
            let m = io::load_matrix(&a.input.input, a.input.format)?;
            let opts = ApproxOptions {
                trials: a.trials,
                incoherence: a.incoherence,
                bounds: a.bounds,
                max_dense: a.max_dense,
            };
            let report = commands::approx(&m, a.method, &sketch_args(&a.sketch, a.p).config(), &opts)?;
            emit(out, &a.output, &report, None, Primary::Json)?;
        }
        Command::Compare(a) => {
            let m = io::load_matrix(&a.input.input, a.input.format)?;
            let opts = ApproxOptions { trials: a.trials, max_dense: a.max_dense, ..ApproxOptions::default() };
            let report = commands::compare(&m, &a.method.0, &a.p, &sketch_args(&a.sketch, None), &opts)?;
            let table = report::to_csv(&report.rows);
            emit(out, &a.output, &report, Some(table), Primary::Json)?;
        }
        Command::Scree(a) => {
            let m = io::load_matrix(&a.input.input, a.input.format)?;
            let report = commands::scree(&m, a.r_max, a.max_dense)?;
            let table = report::to_csv(&report.rows);
            emit(out, &a.output, &report, Some(table), Primary::Csv)?;
        }
        Command::Verify(a) => {
            let mut opts = VerifyOptions::new(a.seed);
            opts.trials = a.trials;
            opts.sketch = SketchArgs { rank: a.rank, k: Some(a.k), s: Some(a.s), p: Some(a.p), q: a.q, seed: a.seed };
            if let Some(path) = &a.input {
                opts.matrix = Some(io::load_matrix(path, a.format)?);
            }
            let report = commands::verify(a.suite, &opts)?;
            emit(out, &a.output, &report, None, Primary::Json)?;
            if !report.passed {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Bench(a) => {
            let opts = BenchOptions {
                rows: a.rows,
                cols: a.cols,
                sketch: sketch_args(&a.sketch, None),
                sweep: a.p.clone(),
                reps: a.reps,
                max_dense: a.max_dense,
            };
            let m = match &a.input {
                Some(path) => io::load_matrix(path, a.format)?,
                None => commands::bench_matrix(&opts)?,
            };
            let report = commands::bench(&m, &opts)?;
            let table = report::to_csv(&report.rows);
            emit(out, &a.output, &report, Some(table), Primary::Csv)?;
        }
        Command::Synth(a) => {
            let mut spec = match (&a.preset, &a.spec) {
                (Some(Preset::Yale), _) => yale_like_spec(),
                (Some(Preset::Cardiac), _) => cardiac_like_spec(),
                (Some(Preset::Video), _) => video_like_spec(),
                (None, Some(path)) => {
                    let text = fs::read_to_string(path).map_err(|e| io::IoError::os(path, e))?;
                    serde_json::from_str::<SynthSpec>(&text)
                        .map_err(|e| CliError::Usage(format!("{}: invalid SynthSpec: {e}", path.display())))?
                }
                (None, None) => return Err(CliError::Usage("synth needs --preset or --spec".into())),
            };
            if let (Some(rows), Some(cols)) = (a.rows, a.cols) {
                spec = spec.with_shape(rows, cols);
            }
            if let Some(seed) = a.seed {
                spec = spec.with_seed(seed);
            }
            commands::synth(&spec, &a.output, a.format, a.max_dense)?;
            let json = serde_json::to_string_pretty(&spec).expect("spec serializes") + "\n";
            if let Some(path) = &a.write_spec {
                write_file(path, &json)?;
            }
            out.write_all(json.as_bytes()).map_err(|source| CliError::Output { path: "<stdout>".into(), source })?;
        }
    }
    Ok(EXIT_OK)
}
