//! Error metrics, incoherence, bound evaluation and empirical lemma checks.

mod incoherence;
mod lemmas;
mod metrics;
mod theory;

pub use incoherence::{incoherence, incoherence_stats, IncoherenceStats};
pub use lemmas::{
    check_lemma1, check_lemma3, check_lemma4, check_lemma5, check_lemma7, pseudo_inverse_tail_bound, ExpectationReport,
    PassRate, PseudoInverseTailReport, RangeCaptureSides, SubsampleReport,
};
pub use metrics::{approx_error, psnr, scree_curve, Psnr, SpectrumSummary};
pub use theory::{
    evaluate_bounds, probability_floor_core, probability_floor_range, sample_floor, theorem_coverage, theory_constants,
    CoverageReport, SampleFloor, SampleFloors, TheoryConstants, TheoryReport,
};
