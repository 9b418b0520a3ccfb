//! Deterministic random streams.
//!
//! Every world owns one ChaCha8 stream. ChaCha is counter based, so the
//! position in the stream (`word_pos`) fully identifies the generator state
//! and can be folded into the world digest.
//!
//! Draw order inside a world is fixed: actuation noise at the start of each
//! agent decision, then per tick pellet regeneration, virus regeneration and
//! respawn placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream id used for world simulation draws.
pub const WORLD_STREAM: u64 = 0;
/// Stream id used for policy draws in the harness, kept apart from the world.
pub const POLICY_STREAM: u64 = 1;
/// Stream id used to derive per-episode seeds.
pub const EPISODE_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldRng {
    inner: ChaCha8Rng,
}

impl WorldRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn for_world(seed: u64) -> Self {
        Self::new(seed, WORLD_STREAM)
    }

    /// Uniform sample from `[lo, hi)`; returns `lo` for an empty range.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.inner.random_range(lo..hi)
        } else {
            lo
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.inner.random_range(0..n)
    }

    /// Position in the keystream, in 32-bit words.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn seed_bytes(&self) -> [u8; 32] {
        self.inner.get_seed()
    }

    pub fn stream(&self) -> u64 {
        self.inner.get_stream()
    }
}
