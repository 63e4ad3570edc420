//! Seeded randomness. Every randomized construction takes a `u64` seed and
//! derives sub-seeds for its stages, so reruns are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_0f_0de5;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a seed with a stage tag (splitmix64 finalizer).
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Retries per randomized constructor, on top of the first attempt.
pub const DEFAULT_RETRIES: usize = 32;

/// Runs `attempt` with derived seeds until it succeeds, at most `1 + retries`
/// times. Returns the value and the number of retries consumed.
pub fn retry<T>(seed: u64, retries: usize, what: &str, mut attempt: impl FnMut(u64) -> Option<T>) -> crate::Result<(T, usize)> {
    for r in 0..=retries {
        let s = if r == 0 { seed } else { derive(seed, r as u64) };
        if let Some(v) = attempt(s) {
            return Ok((v, r));
        }
    }
    crate::error::construction(format!("{what}: no success after {} attempts", retries + 1))
}
