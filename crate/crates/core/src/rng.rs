//! Deterministic random streams.
//!
//! Every stream is ChaCha8 (via `rand_chacha` 0.3.1, pinned) keyed by
//! `seed_from_u64(seed)` with the ChaCha stream id set to the item index, so
//! item `i` of a corpus can be generated without generating items `0..i`.
//! Floats are built from the top 53 bits of `next_u64`, which keeps the
//! sequence independent of the `rand` crate's distribution code.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream(rng)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform on the closed interval `[lo, hi]`.
    pub fn uniform_closed(&mut self, lo: f64, hi: f64) -> f64 {
        let x = (self.0.next_u64() >> 11) as f64 * (1.0 / ((1u64 << 53) - 1) as f64);
        lo + (hi - lo) * x
    }
}
