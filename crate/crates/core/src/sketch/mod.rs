//! SketchyCoreSVD and the full-matrix SketchySVD pipeline it reduces to.

mod config;
mod pipeline;
mod source;

pub use config::{SampleCounts, SketchConfig};
pub use pipeline::{
    build_core_sketches, build_full_sketches, range_bases, recover, sketchy_core_svd, sketchy_core_svd_adaptive,
    sketchy_svd, solve_core, truncate, ApproxFactors, CoreSide, CoreSketch, PhaseTimings, PipelineOutput, RankRFactors,
    RecoverWarning,
};
pub use source::MatrixSource;
