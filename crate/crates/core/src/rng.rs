//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 keystream. The 256-bit key is
//! `seed (LE u64) ‖ substream (LE u64) ‖ 0^128` and the ChaCha stream
//! selector is `stream_id`, so the output is a pure function of
//! `(seed, stream_id, substream)`. Ensembles give walk `i` stream id `i`;
//! generators that need several i.i.d. sequences derive them with
//! [`RngStream::substream`].

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8;key=seed_le64|substream_le64|0^128;stream=stream_id";

/// A source of uniform integers. Generators are written against this trait so
/// the same code can be driven by a random stream or by the exhaustive
/// enumerator in [`crate::exhaust`].
pub trait UniformSource {
    /// Uniform draw from `0..n`. `n` must be positive.
    fn below(&mut self, n: u64) -> u64;
}

impl<S: UniformSource + ?Sized> UniformSource for &mut S {
    fn below(&mut self, n: u64) -> u64 {
        (**self).below(n)
    }
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    substream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::with_substream(seed, stream_id, 0)
    }

    fn with_substream(seed: u64, stream_id: u64, substream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&substream.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            substream,
            inner,
        }
    }

    /// Independent stream for the `index`-th auxiliary sequence of this walk.
    /// Substream 0 is the stream itself, so indices start the derived family at 1.
    pub fn substream(&self, index: u64) -> Self {
        Self::with_substream(self.seed, self.stream_id, index + 1)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// 0 for a base stream, `index + 1` for [`RngStream::substream`]`(index)`.
    pub fn substream_index(&self) -> u64 {
        self.substream
    }

    /// Uniform `f64` in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl UniformSource for RngStream {
    #[inline]
    fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
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
