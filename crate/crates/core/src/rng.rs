//! Deterministic seeding.
//!
//! Every stochastic routine takes an integer seed and builds its own
//! [`SimRng`]. Child seeds are derived by mixing the parent seed with a
//! sequence of indices, so the stream a task sees depends only on its
//! coordinates and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Portable, reproducible generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of indices.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(parent), |acc, &idx| splitmix64(acc ^ splitmix64(idx.wrapping_add(0x632B_E59B_D9B4_E019))))
}
