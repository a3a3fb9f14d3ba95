//! Per-trial seed derivation.
//!
//! Trial `t` of a run with master seed `s` uses the stream seed
//!
//! ```text
//! seed_t = mix64(s ^ (0x9E3779B97F4A7C15 * (t + 1)))      (wrapping multiply)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer (Stafford's "Mix13"). The stream
//! itself is ChaCha8 seeded through `SeedableRng::seed_from_u64(seed_t)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output permutation.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, trial: u64) -> u64 {
    mix64(master ^ GOLDEN_GAMMA.wrapping_mul(trial.wrapping_add(1)))
}

/// The random stream used everywhere a 64-bit stream seed is consumed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
