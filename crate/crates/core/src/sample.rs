//! Seeded random inputs for audits and checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::halfspace::HalfSpaceFunction;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries drawn uniformly from `[lo, hi)`.
pub fn uniform_function(rng: &mut SeededRng, slabs: usize, points: usize, lo: f64, hi: f64) -> HalfSpaceFunction {
    HalfSpaceFunction::from_fn(slabs, points, |_, _| rng.gen_range(lo..hi))
}

/// Nonnegative entries where about a third of the cells are zero, so that
/// supports vary between draws.
pub fn sparse_nonnegative(rng: &mut SeededRng, slabs: usize, points: usize) -> HalfSpaceFunction {
    HalfSpaceFunction::from_fn(slabs, points, |_, _| {
        if rng.gen_bool(1.0 / 3.0) {
            0.0
        } else {
            rng.gen_range(0.0..1.0)
        }
    })
}

pub fn uniform_values(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
