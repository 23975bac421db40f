//! Deterministic seed derivation.
//!
//! Every randomized step in the pipeline draws from a ChaCha generator whose
//! seed is derived from the master seed and a stable label path, so reruns
//! with the same configuration reproduce the same bytes on any platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; a well-distributed mix step for chaining seed words.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a label.
pub fn child_seed(parent: u64, label: &str) -> u64 {
    let mut h = mix(parent);
    for b in label.as_bytes() {
        h = mix(h ^ *b as u64);
    }
    h
}

/// Derives a child seed from a parent seed and an index.
pub fn child_seed_idx(parent: u64, idx: u64) -> u64 {
    mix(parent ^ mix(idx))
}

/// Seeded generator; ChaCha8 is deterministic across platforms.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
