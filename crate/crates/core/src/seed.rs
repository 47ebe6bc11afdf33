//! Seed splitting for order-independent parallel runs.
//!
//! A child seed is `splitmix64(master ^ splitmix64(tag) ^ splitmix64(index))`
//! style mixing, so every (master, tag, index) triple maps to a fixed seed no
//! matter which worker computes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate. ChaCha8 output is portable and
/// stable across platforms for a given seed.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed, a purpose tag and an index.
pub fn derive(master: u64, tag: &str, index: u64) -> u64 {
    let tag_hash = tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
    splitmix64(splitmix64(master) ^ splitmix64(tag_hash).rotate_left(17) ^ splitmix64(index).rotate_left(41))
}
