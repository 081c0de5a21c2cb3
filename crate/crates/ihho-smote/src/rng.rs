//! Deterministic, splittable random number streams.
//!
//! Every randomized stage in the crate draws from an [`RngStream`], a ChaCha8
//! generator addressed by a `(seed, stream_id)` pair. The same pair produces
//! the same value sequence on every platform, and child streams derived with
//! [`RngStream::child`] are independent of their parent and of each other, so
//! work can be split across trees, hawks, or bench cells without the schedule
//! affecting results.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; bijective, well-mixed, platform-independent.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seedable random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a seed (stream id 0).
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Stream addressed by an explicit `(seed, stream_id)` pair.
    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derive a child stream for `tag`. Children of distinct tags, and of
    /// distinct parents, are independent; the derivation does not consume
    /// any state from `self`.
    pub fn child(&self, tag: u64) -> Self {
        Self::with_stream(self.seed, mix(self.stream_id ^ mix(tag)))
    }

    /// Derive a child keyed by two indices, e.g. `(iteration, hawk)`.
    pub fn child_pair(&self, a: u64, b: u64) -> Self {
        self.child(mix(a).wrapping_add(b))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
