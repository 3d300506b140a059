use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Deterministic, splittable random source.
///
/// Backed by a counter-based stream cipher so that the same seed yields the
/// same sample stream on every platform. Substreams are derived by mixing a
/// tag into the seed, giving each (run, layer) pair an independent stream
/// regardless of the order in which streams are consumed.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

/// SplitMix64 finalizer; full-period bijective mixer used for substream keys.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent substream for `tag` (e.g. a layer index).
    /// Distinct (seed, tag) pairs map to distinct cipher keys.
    pub fn substream(&self, tag: u64) -> Rng {
        let sub = splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Rng::from_seed(sub)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random::<u64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// `count` i.i.d. draws from N(mean, std^2).
    pub fn sample_gaussian(&mut self, mean: f64, std: f64, count: usize) -> Result<Vec<f64>> {
        if !std.is_finite() || std < 0.0 {
            return Err(Error::Parameter(format!(
                "gaussian std must be finite and >= 0, got {std}"
            )));
        }
        if !mean.is_finite() {
            return Err(Error::Parameter(format!(
                "gaussian mean must be finite, got {mean}"
            )));
        }
        let mut out = vec![0.0; count];
        self.fill_gaussian(mean, std, &mut out);
        Ok(out)
    }

    pub fn fill_gaussian(&mut self, mean: f64, std: f64, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = mean + std * self.standard_normal();
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.inner.random_range(0..=i);
            slice.swap(i, j);
        }
    }
}
