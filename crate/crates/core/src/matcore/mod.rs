//! Dense linear algebra and randomness primitives.

mod matrix;
mod qr;
mod random;
mod svd;

pub use matrix::{DenseMatrix, IndexSet};
pub use qr::{orthogonal_complement, thin_qr, HouseholderQr};
pub use random::{gaussian_map, sample_without_replacement, sparse_sign_map, MapKind, RandomStream};
pub use svd::{default_pinv_tolerance, pseudo_inverse, pseudo_inverse_with_rank, svd, Svd};
