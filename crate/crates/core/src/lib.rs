//! Near-optimal rank-r SVD from randomized sketches of subsampled rows and
//! columns, with the full-matrix sketching method it reduces to, five earlier
//! sketch-based baselines, and diagnostics that evaluate incoherence, error
//! metrics and the accompanying error bounds.

pub mod baselines;
pub mod diagnostics;
mod error;
pub mod matcore;
pub mod sketch;
pub mod synth;

pub use error::{Error, Result};
pub use matcore::{DenseMatrix, IndexSet, MapKind, RandomStream};
pub use sketch::{RankRFactors, SketchConfig};
