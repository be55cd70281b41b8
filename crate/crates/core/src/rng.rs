//! Reproducible random streams.
//!
//! A [`RandomSource`] is a ChaCha20 generator keyed by a 64-bit master seed
//! and positioned on one of its 2^64 independent streams. Sub-streams for
//! nested work (optimizer restarts, re-verification perturbations) are
//! obtained with [`RandomSource::derive`], which rekeys from the parent's
//! coordinates so the derivation never consumes parent randomness.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::scalar::Real;

/// Recorded in every run manifest.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9): key = seed_from_u64(master_seed), stream = stream_index";

#[derive(Clone, Debug)]
pub struct RandomSource {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Independent child stream identified by `child`.
    pub fn derive(&self, child: u64) -> Self {
        let key = splitmix64(self.master_seed ^ splitmix64(self.stream_index.wrapping_add(0x9E37_79B9)));
        Self::new(key, child)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn gaussian<T: Real>(&mut self) -> T {
        let x: f64 = StandardNormal.sample(&mut self.rng);
        T::lit(x)
    }

    /// Standard complex Gaussian with independent N(0, 1) real and imaginary parts.
    pub fn complex_gaussian<T: Real>(&mut self) -> Complex<T> {
        let re = self.gaussian();
        let im = self.gaussian();
        Complex::new(re, im)
    }

    /// Uniform draw from the probability simplex (Dirichlet(1, ..., 1)).
    pub fn simplex<T: Real>(&mut self, d: usize) -> Vec<T> {
        let raw: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut self.rng)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| T::lit(x / total)).collect()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Stream key for experiment `tag` under a user seed.
pub fn experiment_seed(seed: u64, tag: &str) -> u64 {
    tag.bytes()
        .fold(splitmix64(seed), |acc, b| splitmix64(acc ^ u64::from(b)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
