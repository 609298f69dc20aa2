//! Seeded random streams.
//!
//! Every sampler takes an explicit 64-bit seed. Parallel consumers derive
//! independent sub-streams with [`substream`], so results never depend on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `index`-th independent stream derived from `seed` (splitmix64 mix).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th independent stream derived from `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}
