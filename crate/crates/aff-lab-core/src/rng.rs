//! Deterministic random-number streams.
//!
//! Every sampler draws from a `StreamRng` derived from a `(master_seed,
//! stream_id)` pair: the master seed keys a ChaCha8 cipher and the stream id
//! selects its 64-bit stream counter, so distinct streams never overlap and
//! a fixed master seed reproduces every stream bit-for-bit regardless of
//! how work is scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct StreamRng {
    inner: ChaCha8Rng,
    bit_buf: u64,
    bits_left: u32,
}

impl StreamRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        StreamRng {
            inner,
            bit_buf: 0,
            bits_left: 0,
        }
    }

    /// Fair sign draw, amortized one bit per call.
    #[inline]
    pub fn sign(&mut self) -> i64 {
        if self.bits_left == 0 {
            self.bit_buf = self.inner.next_u64();
            self.bits_left = 64;
        }
        let bit = self.bit_buf & 1;
        self.bit_buf >>= 1;
        self.bits_left -= 1;
        1 - 2 * (bit as i64)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform index in `0..bound` (used by shuffles).
    #[inline]
    pub fn index(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
