//! Seed derivation.
//!
//! Every random draw in a run is keyed by the master seed plus a path of
//! integers (fold, level, model, purpose), so results never depend on the
//! order in which parallel work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags mixed into derived seeds.
pub mod purpose {
    pub const OUTER_FOLDS: u64 = 1;
    pub const INNER_FOLDS: u64 = 2;
    pub const FIT: u64 = 3;
    pub const OOF_FIT: u64 = 4;
    pub const COMPRESS: u64 = 5;
    pub const BLUR: u64 = 6;
    pub const STACK: u64 = 7;
    pub const BASELINE: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and an ordered key path.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(seed: u64, path: &[u64]) -> Rng {
    rng(derive(seed, path))
}
