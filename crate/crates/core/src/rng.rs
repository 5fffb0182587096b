//! Reproducible random streams and thread-count-independent parallel maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Identifies one independent random stream.
///
/// Streams with distinct `(base_seed, stream_index)` pairs are distinct ChaCha
/// key/nonce combinations, hence statistically independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl RandomSeed {
    pub fn new(base_seed: u64) -> Self {
        Self {
            base_seed,
            stream_index: 0,
        }
    }

    pub fn with_stream(base_seed: u64, stream_index: u64) -> Self {
        Self {
            base_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A seed family keyed by `tag`, disjoint from the parent and from other tags.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            base_seed: splitmix64(splitmix64(self.base_seed ^ splitmix64(self.stream_index)) ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream_index: 0,
        }
    }

    /// The `i`-th member of this seed's ensemble.
    pub fn child(&self, i: u64) -> Self {
        Self {
            base_seed: splitmix64(self.base_seed ^ splitmix64(self.stream_index)),
            stream_index: i,
        }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian: real and imaginary parts independent `N(0, 1/2)`.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re = normal(rng);
    let im = normal(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `f(0), ..., f(n-1)` evaluated in parallel, returned in index order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Runs `f` on a dedicated pool with `threads` workers (`0` keeps the global pool).
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
