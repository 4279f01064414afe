//! Seed derivation and the RNG used everywhere in the crate.
//!
//! All randomness flows from explicit `u64` seeds through [`rng`], so equal
//! seeds give bit-identical results on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a parent seed with a stream index (epoch, repetition, ...) into an
/// uncorrelated child seed. SplitMix64 finalizer over the combined words.
pub fn derive(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Named sub-streams, so that e.g. the classifier initialisation and the
/// subset sampling of one repetition never share a stream.
pub fn derive_named(seed: u64, name: &str) -> u64 {
    name.bytes().fold(seed, |acc, b| derive(acc, b as u64))
}
