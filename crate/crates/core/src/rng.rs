//! Seeded random streams for sharded simulation.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood, 2014): a Weyl counter
//! advanced by `0x9E3779B97F4A7C15` per draw, passed through the 64-bit
//! finalizer [`mix64`]. Shard `i` of a run seeded with `seed` draws from a
//! SplitMix64 stream whose initial state is [`stream_seed`]`(seed, i)`.
//!
//! Bounded integers come from `rand`'s `random_range`, which rejects to stay
//! unbiased.

use rand::RngCore;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer (variant 13 of Stafford's mixers).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial state of shard `shard`'s stream:
/// `mix64(seed ^ mix64((shard + 1) * GOLDEN_GAMMA))`.
pub fn stream_seed(seed: u64, shard: u64) -> u64 {
    mix64(seed ^ mix64(shard.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        SplitMix64 { state }
    }

    /// The stream for shard `shard` of a run seeded with `seed`.
    pub fn for_shard(seed: u64, shard: u64) -> Self {
        SplitMix64::new(stream_seed(seed, shard))
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Trials per shard: `trials / shards`, with the first `trials % shards`
/// shards taking one extra.
pub fn shard_plan(trials: u64, shards: u32) -> Vec<u64> {
    let shards = u64::from(shards.max(1));
    let (base, extra) = (trials / shards, trials % shards);
    (0..shards).map(|i| base + u64::from(i < extra)).collect()
}
