//! Seedable random streams.
//!
//! A stream is identified by `(seed, stream_id)` and backed by ChaCha8, whose
//! 64-bit stream selector gives independent keystreams for the same seed.
//! Gaussian variates use the ziggurat sampler of `rand_distr::StandardNormal`.

use nalgebra::DMatrix;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Identifier of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rng {
    pub seed: u64,
    pub stream_id: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derives the stream for child `index`, e.g. one trial of a Monte-Carlo loop.
    ///
    /// Children of distinct parents or distinct indices map to distinct stream ids
    /// with overwhelming probability.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(splitmix64(self.stream_id ^ 0x6a09_e667_f3bc_c909) ^ index);
        Self {
            seed: self.seed,
            stream_id: mixed,
        }
    }

    /// Two-level child, keyed by (point index, trial index).
    pub fn grandchild(&self, outer: u64, inner: u64) -> Self {
        self.child(outer).child(inner)
    }

    pub fn generator(&self) -> Stream {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        Stream { inner }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Live generator state for one stream.
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn bernoulli_half(&mut self) -> bool {
        self.inner.next_u32() & 1 == 1
    }

    /// Matrix of i.i.d. N(0, 1) entries, filled in column-major order.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| self.normal())
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
