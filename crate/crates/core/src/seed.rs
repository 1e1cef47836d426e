//! Per-sample seed derivation.
//!
//! Every sample in a batch draws from its own ChaCha8 stream seeded with
//! `mix(master, index)`. The mix is the SplitMix64 finalizer (increment
//! `0x9E3779B97F4A7C15`, multipliers `0xBF58476D1CE4E5B9` and
//! `0x94D049BB133111EB`, shifts 30/27/31) applied as
//! `splitmix64(master ^ splitmix64(index))`. Because the seed depends only on
//! the sample index, outputs do not depend on worker count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the toolkit.
pub type SampleRng = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn sample_rng(master: u64, index: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(mix(master, index))
}
