//! Seed derivation for reproducible randomness under parallelism.
//!
//! Every random stream in the crate (trees, epochs, folds, repetitions,
//! permutations, generated sessions) is seeded by `mix64(parent, index)`, so a
//! unit of work draws the same numbers whether it runs serially or on a
//! thread pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for work unit `index` under `parent`:
/// `splitmix64(parent ^ splitmix64(index))`.
pub fn mix64(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
