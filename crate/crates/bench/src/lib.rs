//! Benchmark inputs shared by the criterion targets.

use hhk_core::analytic::corpus_field;
use hhk_core::{Grid3, VectorField};

/// The mixed corpus field sampled on `[-L, L]^3` with `n` nodes per axis.
pub fn mixed_field(n: usize, half_width: f64) -> VectorField {
    let grid = Grid3::centered(n, half_width).expect("valid grid");
    corpus_field("mixed").expect("corpus field").sample_field(grid).expect("finite samples")
}
