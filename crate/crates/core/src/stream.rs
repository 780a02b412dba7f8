//! Deterministic, partitionable random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible uniform source identified by `(seed, stream_index)`.
///
/// Distinct indices under the same seed give independent ChaCha streams,
/// so work split across partitions is identical for any thread count.
#[derive(Debug, Clone)]
pub struct SampleStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        SampleStream { seed, index: stream_index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.index
    }

    /// The stream for partition `i` of the same seed.
    pub fn child(&self, i: u64) -> SampleStream {
        SampleStream::new(self.seed, self.index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i + 1))
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..len`.
    #[inline]
    pub fn index_below(&mut self, len: usize) -> usize {
        ((self.uniform() * len as f64) as usize).min(len - 1)
    }

    /// Standard exponential draw.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}
