use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sketchy_core::baselines::{baseline_approx, BaselineMethod};
use sketchy_core::sketch::{sketchy_core_svd, sketchy_svd, PhaseTimings, RecoverWarning};
use sketchy_core::{DenseMatrix, RandomStream, RankRFactors, Result, SketchConfig};

/// Every method the CLI can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    SketchyCoreSvd,
    SketchySvd,
    Baseline(BaselineMethod),
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::SketchyCoreSvd,
        Method::SketchySvd,
        Method::Baseline(BaselineMethod::Hmt),
        Method::Baseline(BaselineMethod::Woodruff),
        Method::Baseline(BaselineMethod::Cohen),
        Method::Baseline(BaselineMethod::Boutsidis),
        Method::Baseline(BaselineMethod::Tropp17),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SketchyCoreSvd => "sketchy_core_svd",
            Method::SketchySvd => "sketchy_svd",
            Method::Baseline(b) => b.name(),
        }
    }

    /// Whether the sampling ratios p and q affect the result.
    pub fn uses_ratios(self) -> bool {
        self == Method::SketchyCoreSvd
    }

    /// Parses a comma-separated list; `all` expands to every method.
    pub fn parse_list(list: &str) -> std::result::Result<Vec<Method>, String> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(Method::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        out.dedup();
        if out.is_empty() {
            return Err("no methods given".into());
        }
        Ok(out)
    }

    /// Runs trial `trial`. Sketchy methods draw from stream `trial` of the
    /// configured seed; baselines from the same (seed, trial) pair.
    pub fn run(self, a: &DenseMatrix, config: &SketchConfig, trial: u64) -> Result<MethodRun> {
        let cfg = config.clone().with_stream(trial);
        match self {
            Method::SketchyCoreSvd | Method::SketchySvd => {
                let out =
                    if self == Method::SketchyCoreSvd { sketchy_core_svd(a, &cfg)? } else { sketchy_svd(a, &cfg)? };
                Ok(MethodRun {
                    factors: out.factors,
                    timings: Some(out.timings),
                    total: out.timings.total().as_secs_f64(),
                    warnings: out.warnings,
                })
            }
            Method::Baseline(b) => {
                let start = std::time::Instant::now();
                let factors =
                    baseline_approx(a, b, cfg.rank, cfg.range_size, cfg.core_size, RandomStream::new(cfg.seed, trial))?;
                Ok(MethodRun { factors, timings: None, total: start.elapsed().as_secs_f64(), warnings: Vec::new() })
            }
        }
    }
}

pub struct MethodRun {
    pub factors: RankRFactors,
    pub timings: Option<PhaseTimings>,
    /// Wall time of the whole run in seconds.
    pub total: f64,
    pub warnings: Vec<RecoverWarning>,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "sketchy_core_svd" | "core" => Ok(Method::SketchyCoreSvd),
            "sketchy_svd" | "full" => Ok(Method::SketchySvd),
            other => other.parse::<BaselineMethod>().map(Method::Baseline).map_err(|_| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method '{s}' (expected one of {}, or all)", names.join(", "))
            }),
        }
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}
