//! Seed derivation. Every random draw in the crate flows from an explicit root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout.
pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer applied to `seed + (index + 1) * golden`.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th independent task under `seed`.
pub fn child_rng(seed: u64, index: u64) -> Rng {
    rng_from_seed(splitmix64(seed, index))
}
