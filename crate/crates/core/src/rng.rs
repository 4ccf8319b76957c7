//! Reproducible random streams and the replicate runner.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` (expanded with
//! `SeedableRng::seed_from_u64`) and positioned on the ChaCha stream
//! `stream_id`. Streams with the same seed and different ids share a key but
//! use disjoint nonces, so their outputs are independent keystreams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
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

/// Stream id for replicate `index` of experiment `tag`. Tags occupy the top
/// 24 bits, so experiments never overlap for fewer than 2^40 replicates.
pub fn stream_id(tag: u32, index: u64) -> u64 {
    ((tag as u64) << 40) | (index & ((1u64 << 40) - 1))
}

/// Uniform draw on the open interval (0, 1); zero is resampled.
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -open01(rng).ln() / rate
}

/// Uniform draw on the open interval (lo, hi).
pub fn uniform_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let x = lo + (hi - lo) * open01(rng);
        if x > lo && x < hi {
            return x;
        }
    }
}

/// Runs `reps` replicates, replicate `i` on stream `stream_id(tag, i)`.
///
/// Results come back in replicate order whatever the size of the rayon pool,
/// so anything folded from them sequentially is bit-stable.
pub fn replicate<T, F>(seed: u64, tag: u32, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, usize) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, stream_id(tag, i as u64));
            f(&mut rng, i)
        })
        .collect()
}
