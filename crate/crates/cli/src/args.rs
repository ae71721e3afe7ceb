use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{Suite, DEFAULT_MAX_DENSE};
use crate::io::Format;
use crate::method::Method;

#[derive(Debug, Parser)]
#[command(name = "sketchy", version, about = "Low-rank SVD from subsampled sketches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank-r approximation of a matrix file with one method.
    Approx(ApproxArgs),
    /// Error and timing table for several methods over a p sweep.
    Compare(CompareArgs),
    /// Exact scree curve from a full SVD.
    Scree(ScreeArgs),
    /// Monte Carlo and identity checks of the error analysis.
    Verify(VerifyArgs),
    /// Per-phase timings of the core and full methods.
    Bench(BenchArgs),
    /// Write a synthetic matrix with a prescribed spectrum.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Input format; guessed from the extension or contents when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SketchFlags {
    /// Target rank r.
    #[arg(long = "rank", short = 'r')]
    pub rank: usize,
    /// Range sketch size (default 4r + 1).
    #[arg(short = 'k')]
    pub k: Option<usize>,
    /// Core sketch size (default 2k + 1).
    #[arg(short = 's')]
    pub s: Option<usize>,
    /// Core sample ratio (default p).
    #[arg(short = 'q')]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, short = 'm', default_value = "sketchy_core_svd", value_parser = parse_method)]
    pub method: Method,
    #[command(flatten)]
    pub sketch: SketchFlags,
    /// Row/column sample ratio (default 1).
    #[arg(short = 'p')]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Report the coherence of the true and computed subspaces.
    #[arg(long)]
    pub incoherence: bool,
    /// Evaluate the theoretical error bounds (implies a full SVD).
    #[arg(long)]
    pub bounds: bool,
    /// Largest rows*cols for which a full SVD is attempted.
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE)]
    pub max_dense: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated methods, or `all`.
    #[arg(long, short = 'm', default_value = "all", value_parser = parse_methods)]
    pub method: MethodList,
    #[command(flatten)]
    pub sketch: SketchFlags,
    /// Comma-separated p values.
    #[arg(short = 'p', value_delimiter = ',', default_values_t = [0.3, 0.35, 0.4])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE)]
    pub max_dense: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScreeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Last rank to report (default: all).
    #[arg(long)]
    pub r_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE)]
    pub max_dense: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials (or instances) per suite, overriding each suite's default.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Matrix for the theorem suites (default: 400x300 Yale-like synthetic).
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long = "rank", short = 'r', default_value_t = 6)]
    pub rank: usize,
    #[arg(short = 'k', default_value_t = 25)]
    pub k: usize,
    #[arg(short = 's', default_value_t = 51)]
    pub s: usize,
    #[arg(short = 'p', default_value_t = 0.5)]
    pub p: f64,
    #[arg(short = 'q')]
    pub q: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark this matrix instead of a synthetic one.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 5000)]
    pub rows: usize,
    #[arg(long, default_value_t = 2000)]
    pub cols: usize,
    #[command(flatten)]
    pub sketch: SketchFlags,
    /// Comma-separated p values for the core method.
    #[arg(short = 'p', value_delimiter = ',', default_values_t = [0.1, 0.2, 0.4])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE)]
    pub max_dense: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Yale,
    Cardiac,
    Video,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Preset spectrum and coherence modelled on a reference dataset.
    #[arg(long, value_enum, conflicts_with = "spec")]
    pub preset: Option<Preset>,
    /// SynthSpec JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Reshape the preset or spec (both flags are needed).
    #[arg(long, requires = "cols")]
    pub rows: Option<usize>,
    #[arg(long, requires = "rows")]
    pub cols: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the effective SynthSpec as JSON.
    #[arg(long, value_name = "PATH")]
    pub write_spec: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_DENSE)]
    pub max_dense: usize,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodList(pub Vec<Method>);

fn parse_methods(s: &str) -> Result<MethodList, String> {
    Method::parse_list(s).map(MethodList)
}
