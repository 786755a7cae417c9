//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the master seed and
//! selected by a 64-bit stream index, so stream `k` can be created in any
//! order, on any thread, and always yields the same words.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct RandomSource {
    inner: ChaCha8Rng,
}

/// Deterministic stream `stream_index` of the family keyed by `master_seed`.
pub fn derive_stream(master_seed: u64, stream_index: u64) -> RandomSource {
    RandomSource::new(master_seed, stream_index)
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1), with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }
}
