use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::matcore::{MapKind, RandomStream};

/// Sketch sizes, sampling ratios and randomness for one pipeline run.
///
/// `row_ratio` (p) sets how many rows/columns feed the range sketches and
/// `core_ratio` (q) how many feed the core sketch. `p = q = 1` is the
/// full-matrix method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub rank: usize,
    pub range_size: usize,
    pub core_size: usize,
    pub row_ratio: f64,
    pub core_ratio: f64,
    #[serde(default)]
    pub map: MapKind,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

/// Row/column counts derived from the ratios for a given matrix shape:
/// `m = ⌈pM⌉`, `n = ⌈pN⌉`, `m′ = ⌈qM⌉`, `n′ = ⌈qN⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub rows: usize,
    pub cols: usize,
    pub core_rows: usize,
    pub core_cols: usize,
}

impl SketchConfig {
    /// Rank `r` with `k = 4r + 1`, `s = 2k + 1` and no subsampling.
    pub fn new(rank: usize) -> Self {
        let range_size = 4 * rank + 1;
        Self {
            rank,
            range_size,
            core_size: 2 * range_size + 1,
            row_ratio: 1.0,
            core_ratio: 1.0,
            map: MapKind::Gaussian,
            seed: 0,
            stream: 0,
        }
    }

    pub fn with_sizes(mut self, range_size: usize, core_size: usize) -> Self {
        self.range_size = range_size;
        self.core_size = core_size;
        self
    }

    pub fn with_ratios(mut self, row_ratio: f64, core_ratio: f64) -> Self {
        self.row_ratio = row_ratio;
        self.core_ratio = core_ratio;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_map(mut self, map: MapKind) -> Self {
        self.map = map;
        self
    }

    /// Same configuration with `p = q = 1`.
    pub fn full(&self) -> Self {
        self.clone().with_ratios(1.0, 1.0)
    }

    pub fn random_stream(&self) -> RandomStream {
        RandomStream::new(self.seed, self.stream)
    }

    pub fn sample_counts(&self, rows: usize, cols: usize) -> SampleCounts {
        SampleCounts {
            rows: ratio_count(self.row_ratio, rows),
            cols: ratio_count(self.row_ratio, cols),
            core_rows: ratio_count(self.core_ratio, rows),
            core_cols: ratio_count(self.core_ratio, cols),
        }
    }

    /// Checks `r ≤ k ≤ s ≤ min(m, n, m′, n′)` and `0 < p ≤ q ≤ 1` against an
    /// `rows x cols` matrix. Errors name the violated inequality.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<SampleCounts> {
        let (r, k, s) = (self.rank, self.range_size, self.core_size);
        let (p, q) = (self.row_ratio, self.core_ratio);
        ensure_arg!(rows > 0 && cols > 0, "matrix must be nonempty, got {rows}x{cols}");
        ensure_arg!(r >= 1, "rank r must be at least 1");
        ensure_arg!(p > 0.0 && p <= 1.0, "0 < p <= 1 violated: p = {p}");
        ensure_arg!(q > 0.0 && q <= 1.0, "0 < q <= 1 violated: q = {q}");
        ensure_arg!(p <= q, "p <= q violated: p = {p}, q = {q}");
        ensure_arg!(r <= k, "r <= k violated: r = {r}, k = {k}");
        ensure_arg!(k <= s, "k <= s violated: k = {k}, s = {s}");
        let c = self.sample_counts(rows, cols);
        let floor = c.rows.min(c.cols).min(c.core_rows).min(c.core_cols);
        ensure_arg!(
            s <= floor,
            "s <= min(m, n, m', n') violated: s = {s}, m = {}, n = {}, m' = {}, n' = {}",
            c.rows,
            c.cols,
            c.core_rows,
            c.core_cols
        );
        if let MapKind::SparseSign { nonzeros_per_column } = self.map {
            ensure_arg!(nonzeros_per_column >= 1, "sparse sign density must be at least 1");
        }
        Ok(c)
    }
}

/// `⌈ratio · dim⌉`, ignoring rounding noise in the product, clamped to `1..=dim`.
fn ratio_count(ratio: f64, dim: usize) -> usize {
    let raw = (ratio * dim as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_rank() {
        let c = SketchConfig::new(20);
        assert_eq!((c.range_size, c.core_size), (81, 163));
    }

    #[test]
    fn counts_use_ceiling() {
        let c = SketchConfig::new(2).with_ratios(0.4, 0.5);
        assert_eq!(c.sample_counts(2500, 640), SampleCounts { rows: 1000, cols: 256, core_rows: 1250, core_cols: 320 });
        assert_eq!(SketchConfig::new(1).with_ratios(0.3, 0.3).sample_counts(641, 10).rows, 193);
        assert_eq!(SketchConfig::new(1).with_ratios(0.35, 0.35).sample_counts(640, 640).rows, 224);
    }

    #[test]
    fn validation_names_the_inequality() {
        let msg = |c: SketchConfig| c.validate(100, 80).unwrap_err().to_string();
        assert!(msg(SketchConfig::new(3).with_sizes(2, 5)).contains("r <= k"));
        assert!(msg(SketchConfig::new(3).with_sizes(6, 5)).contains("k <= s"));
        assert!(msg(SketchConfig::new(3).with_ratios(0.5, 0.4)).contains("p <= q"));
        assert!(msg(SketchConfig::new(3).with_ratios(0.0, 0.4)).contains("0 < p"));
        assert!(msg(SketchConfig::new(3).with_sizes(13, 50).with_ratios(0.5, 0.5)).contains("s <= min"));
        assert!(SketchConfig::new(2).with_sizes(10, 21).with_ratios(0.5, 0.5).validate(100, 80).is_ok());
    }
}
