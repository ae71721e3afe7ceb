//! Seeded random streams, dimension-reduction maps and uniform subsampling.
//!
//! Every random quantity in the crate is drawn from a [`RandomStream`], a
//! `(seed, stream id)` pair backed by ChaCha12. ChaCha is counter based and
//! takes a 64-bit stream selector natively, so child streams are independent
//! keystreams rather than offsets into a shared sequence.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::{DenseMatrix, IndexSet};
use crate::error::{ensure_arg, Result};

/// Reproducible source of randomness identified by `(seed, stream)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream keyed by `label`. Same parent and label give the same
    /// child; distinct labels give distinct ChaCha streams.
    pub fn fork(&self, label: u64) -> Self {
        Self { seed: self.seed, stream: mix(self.stream, label) }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parent: u64, label: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(label.rotate_left(32) ^ 0xD6E8_FEB8_6659_FD93))
}

/// Draws `count` distinct indices from `0..population`, every subset of that
/// size being equally likely. The result is sorted.
pub fn sample_without_replacement(count: usize, population: usize, rng: RandomStream) -> Result<IndexSet> {
    ensure_arg!(count <= population, "sample size {count} exceeds population {population}");
    if count == population {
        return Ok(IndexSet::full(population));
    }
    let mut gen = rng.rng();
    let picked = index::sample(&mut gen, population, count).into_vec();
    IndexSet::new(picked, population)
}

/// `rows x cols` matrix of i.i.d. standard normal entries (unscaled).
pub fn gaussian_map(rows: usize, cols: usize, rng: RandomStream) -> Result<DenseMatrix> {
    ensure_arg!(rows > 0 && cols > 0, "map dimensions must be positive, got {rows}x{cols}");
    let mut gen = rng.rng();
    let data = (0..rows * cols).map(|_| gen.sample::<f64, _>(StandardNormal)).collect();
    Ok(DenseMatrix::from_raw(rows, cols, data))
}

/// Sparse sign map: each column holds exactly `nonzeros_per_column` entries
/// `±sqrt(rows / nonzeros_per_column)` at uniformly chosen rows.
pub fn sparse_sign_map(rows: usize, cols: usize, nonzeros_per_column: usize, rng: RandomStream) -> Result<DenseMatrix> {
    ensure_arg!(rows > 0 && cols > 0, "map dimensions must be positive, got {rows}x{cols}");
    ensure_arg!(
        (1..=rows).contains(&nonzeros_per_column),
        "nonzeros per column must satisfy 1 <= {nonzeros_per_column} <= rows = {rows}"
    );
    let magnitude = (rows as f64 / nonzeros_per_column as f64).sqrt();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut gen = rng.rng();
    for j in 0..cols {
        for i in index::sample(&mut gen, rows, nonzeros_per_column).into_iter() {
            let sign = if gen.random::<bool>() { 1.0 } else { -1.0 };
            out.set(i, j, sign * magnitude);
        }
    }
    Ok(out)
}

/// Which random map builds the sketches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MapKind {
    #[default]
    Gaussian,
    SparseSign {
        nonzeros_per_column: usize,
    },
}

impl MapKind {
    pub const DEFAULT_SPARSITY: usize = 8;

    /// Draws a `rows x cols` map of this kind. Sparse maps clamp their
    /// density to the row count.
    pub fn draw(&self, rows: usize, cols: usize, rng: RandomStream) -> Result<DenseMatrix> {
        match *self {
            MapKind::Gaussian => gaussian_map(rows, cols, rng),
            MapKind::SparseSign { nonzeros_per_column } => {
                sparse_sign_map(rows, cols, nonzeros_per_column.min(rows), rng)
            }
        }
    }
}
