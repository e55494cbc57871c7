//! Seed derivation for reproducible, order-independent randomness.
//!
//! Every random stream is a ChaCha8 generator keyed by a seed derived from
//! `(root seed, path of indices)`. Trials, restarts and Monte Carlo blocks
//! each get their own stream, so results do not depend on the order or the
//! number of workers that consume them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a child index into a parent seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Generator for the stream addressed by `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> Rng {
    let s = path.iter().fold(seed, |acc, &i| derive_seed(acc, i));
    ChaCha8Rng::seed_from_u64(s)
}
