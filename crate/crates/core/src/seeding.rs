//! Seed derivation for independent, reproducible random streams.
//!
//! Every stream in the system (world build, month pools, eval draws,
//! per-round selection, replay interleaving, ...) gets its own rng derived
//! from a root seed plus a string tag and an index path. Derivation is a
//! fixed integer mix, so streams are stable across platforms and independent
//! of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, no allocation.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fold_str(seed: u64, tag: &str) -> u64 {
    let mut acc = mix(seed ^ 0x7461_675f); // "tag_"
    for b in tag.as_bytes() {
        acc = mix(acc ^ u64::from(*b));
    }
    acc
}

/// Derive a child seed from `(seed, tag, path)`.
pub fn derive(seed: u64, tag: &str, path: &[u64]) -> u64 {
    let mut acc = fold_str(seed, tag);
    for p in path {
        acc = mix(acc ^ *p);
    }
    acc
}

/// Deterministic rng for the stream named by `(tag, path)`.
pub fn rng(seed: u64, tag: &str, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag, path))
}
