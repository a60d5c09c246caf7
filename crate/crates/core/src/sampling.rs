//! Seeded, shardable sampling.
//!
//! A campaign seed is split into named per-stage streams, and every sample
//! index gets its own generator. Shard `i` of `n` handles the indices
//! congruent to `i` mod `n`, so shard results merge by summation and the
//! union of all shards equals the unsharded run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the named stage stream derived from a campaign seed.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    // FNV-1a over the stage name
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in stage.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(seed ^ splitmix(h))
}

/// Generator for sample `index` of a stage.
pub fn sample_rng(stage_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub index: u32,
    pub count: u32,
}

impl Default for Shard {
    fn default() -> Self {
        Shard::ALL
    }
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, count: 1 };

    pub fn new(index: u32, count: u32) -> Option<Self> {
        (count > 0 && index < count).then_some(Shard { index, count })
    }

    /// Sample indices of `0..total` owned by this shard.
    pub fn indices(self, total: u64) -> impl Iterator<Item = u64> {
        (self.index as u64..total).step_by(self.count as usize)
    }
}
