//! Machine-readable reports. Each JSON report carries `schema` and
//! `schema_version`; the matching JSON Schema files live in `schemas/`.

use serde::{Deserialize, Serialize};
use sketchy_core::diagnostics::{IncoherenceStats, TheoryReport};
use sketchy_core::sketch::PhaseTimings;
use sketchy_core::SketchConfig;

use crate::method::Method;

pub const SCHEMA_VERSION: u32 = 1;

/// The sketch parameters a run used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub r: usize,
    pub k: usize,
    pub s: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl ConfigEcho {
    pub fn of(cfg: &SketchConfig) -> Self {
        Self { r: cfg.rank, k: cfg.range_size, s: cfg.core_size, p: cfg.row_ratio, q: cfg.core_ratio, seed: cfg.seed }
    }

    pub fn to_config(self) -> SketchConfig {
        SketchConfig::new(self.r).with_sizes(self.k, self.s).with_ratios(self.p, self.q).with_seed(self.seed)
    }
}

/// Mean and sample standard deviation over trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl TrialStats {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { n, mean: 0.0, std: 0.0, min: 0.0, max: 0.0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std =
            if n > 1 { (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { n, mean, std, min, max }
    }
}

pub fn median(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Per-phase wall times in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeconds {
    pub sketch_build: f64,
    pub qr: f64,
    pub core: f64,
    pub truncate: f64,
}

impl PhaseSeconds {
    pub fn of(t: &PhaseTimings) -> Self {
        Self {
            sketch_build: t.sketch_build.as_secs_f64(),
            qr: t.qr.as_secs_f64(),
            core: t.core.as_secs_f64(),
            truncate: t.truncate.as_secs_f64(),
        }
    }

    pub fn mean(all: &[PhaseSeconds]) -> Self {
        let pick = |f: fn(&PhaseSeconds) -> f64| TrialStats::of(&all.iter().map(f).collect::<Vec<_>>()).mean;
        Self {
            sketch_build: pick(|p| p.sketch_build),
            qr: pick(|p| p.qr),
            core: pick(|p| p.core),
            truncate: pick(|p| p.truncate),
        }
    }

    pub fn median(all: &[PhaseSeconds]) -> Self {
        let pick = |f: fn(&PhaseSeconds) -> f64| median(&all.iter().map(f).collect::<Vec<_>>());
        Self {
            sketch_build: pick(|p| p.sketch_build),
            qr: pick(|p| p.qr),
            core: pick(|p| p.core),
            truncate: pick(|p| p.truncate),
        }
    }

    /// Everything except the truncation.
    pub fn factorization(&self) -> f64 {
        self.sketch_build + self.qr + self.core
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub schema_version: u32,
    pub method: Method,
    pub shape: [usize; 2],
    pub config: ConfigEcho,
    pub trials: usize,
    pub err: TrialStats,
    pub err_per_trial: Vec<f64>,
    /// Mean phase times; only the sketch methods report phases.
    pub phase_seconds: Option<PhaseSeconds>,
    pub total_seconds: TrialStats,
    /// Optimal error at rank r, when the matrix is small enough for a full SVD.
    pub scree_at_rank: Option<f64>,
    pub incoherence: Option<IncoherenceStats>,
    pub bounds: Option<TheoryReport>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: Method,
    pub p: f64,
    pub q: f64,
    pub k: usize,
    pub s: usize,
    pub trials: usize,
    pub err_mean: f64,
    pub err_std: f64,
    pub sketch_build_seconds: Option<f64>,
    pub factorization_seconds: Option<f64>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema: String,
    pub schema_version: u32,
    pub shape: [usize; 2],
    pub r: usize,
    pub seed: u64,
    pub trials: usize,
    pub scree_at_rank: Option<f64>,
    pub rows: Vec<CompareRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeRow {
    pub r: usize,
    pub scree: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeReport {
    pub schema: String,
    pub schema_version: u32,
    pub shape: [usize; 2],
    pub rows: Vec<ScreeRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub summary: String,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub schema_version: u32,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub p: f64,
    pub q: f64,
    pub reps: usize,
    pub sketch_build_seconds: f64,
    pub qr_seconds: f64,
    pub core_seconds: f64,
    pub truncate_seconds: f64,
    pub factorization_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub schema_version: u32,
    pub shape: [usize; 2],
    pub r: usize,
    pub k: usize,
    pub s: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

/// Rows of a report as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("report rows serialize to CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV writer")).expect("CSV output is UTF-8")
}

pub fn schema_name(kind: &str) -> String {
    format!("sketchy.{kind}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_use_the_sample_deviation() {
        let s = TrialStats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert_eq!(TrialStats::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn config_echo_round_trips() {
        let cfg = SketchConfig::new(5).with_ratios(0.3, 0.4).with_seed(11);
        assert_eq!(ConfigEcho::of(&cfg).to_config(), cfg);
    }

    #[test]
    fn csv_rows_have_a_header() {
        let text = to_csv(&[ScreeRow { r: 0, scree: 1.0 }, ScreeRow { r: 1, scree: 0.25 }]);
        assert_eq!(text, "r,scree\n0,1.0\n1,0.25\n");
    }
}
