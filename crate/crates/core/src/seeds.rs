//! Deterministic seed derivation.
//!
//! All randomness in a run flows from a single root seed. Components draw
//! from child streams derived by hashing the root with a textual tag and an
//! index, so any component can be re-seeded in isolation for debugging.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a root seed, a stream tag, and an index.
pub fn child(root: u64, tag: &str, index: u64) -> u64 {
    let mut acc = splitmix64(root);
    for &b in tag.as_bytes() {
        acc = splitmix64(acc ^ u64::from(b));
    }
    splitmix64(acc ^ index)
}

/// Seeded generator for a named child stream.
pub fn rng(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child(root, tag, index))
}
