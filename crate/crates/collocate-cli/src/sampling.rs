//! Reproducible Gaussian sampling for Monte Carlo error estimation.
//!
//! Every sample is drawn from its own counter-indexed ChaCha stream, so
//! sample `k` is a pure function of `(seed, k)`. Runs with different sample
//! counts or different parameter dimensions therefore agree on the samples
//! they share, and parallel consumers can draw samples in any order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Draws standard normal vectors indexed by sample number.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSampler {
    seed: u64,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Returns sample `index` as a vector of `dims` independent standard
    /// normals. Extending `dims` extends the vector without changing the
    /// leading entries.
    pub fn sample(&self, index: u64, dims: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        (0..dims).map(|_| standard_normal(&mut rng)).collect()
    }
}

/// One standard normal draw via inverse transform sampling.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal parameters are valid");
    normal.inverse_cdf(uniform_open(rng))
}

/// Uniform draw on the open interval (0, 1), exactly representable and
/// bounded away from both endpoints so the inverse CDF stays finite.
fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible() {
        let sampler = GaussianSampler::new(7);
        assert_eq!(sampler.sample(3, 10), sampler.sample(3, 10));
    }

    #[test]
    fn different_indices_give_different_samples() {
        let sampler = GaussianSampler::new(7);
        assert_ne!(sampler.sample(0, 4), sampler.sample(1, 4));
    }

    #[test]
    fn different_seeds_give_different_samples() {
        assert_ne!(
            GaussianSampler::new(1).sample(0, 4),
            GaussianSampler::new(2).sample(0, 4)
        );
    }

    #[test]
    fn longer_samples_extend_shorter_ones() {
        let sampler = GaussianSampler::new(42);
        let short = sampler.sample(5, 8);
        let long = sampler.sample(5, 64);
        assert_eq!(&long[..8], &short[..]);
    }

    #[test]
    fn inverse_cdf_matches_known_quantiles() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let cases = [
            (0.5, 0.0),
            (0.975, 1.959_963_984_540_054),
            (0.841_344_746_068_542_9, 1.0),
            (0.998_650_101_968_369_9, 3.0),
            (0.001_349_898_031_630_1, -3.0),
        ];
        for (p, x) in cases {
            assert!(
                (normal.inverse_cdf(p) - x).abs() <= 1e-8,
                "quantile at p = {p} was {} instead of {x}",
                normal.inverse_cdf(p)
            );
        }
    }

    #[test]
    fn uniform_draws_stay_strictly_inside_the_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10_000 {
            let u = uniform_open(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn sample_moments_look_gaussian() {
        let sampler = GaussianSampler::new(11);
        let n = 20_000;
        let values: Vec<f64> = (0..n).map(|k| sampler.sample(k, 1)[0]).collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03, "sample mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "sample variance {var}");
    }
}
