use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `N(0, σ²)`; sub-Gaussian with parameter σ.
    Gaussian,
    /// Uniform on `[-σ√3, σ√3]`, variance σ².
    UniformBounded,
}

/// I.i.d. additive measurement noise. `sigma` is the standard deviation.
///
/// Draws come from ChaCha20 seeded with `seed` through
/// `SeedableRng::seed_from_u64`; normal variates use the ziggurat sampler of
/// `rand_distr::StandardNormal`. The stream is therefore a pure function of
/// the seed and independent of thread count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            sigma,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::arg(format!("noise level must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    /// The same model on an independent substream.
    pub fn for_replication(&self, index: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, index),
            ..*self
        }
    }

    pub fn draw(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        let sigma = self.sigma;
        Ok(match self.kind {
            NoiseKind::Gaussian => (0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            NoiseKind::UniformBounded => {
                let half_width = sigma * 3f64.sqrt();
                (0..n)
                    .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
                    .collect()
            }
        })
    }
}

/// SplitMix64 finaliser applied to `master + index · φ`, giving decorrelated
/// seeds for replication substreams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(e: &[f64]) -> (f64, f64) {
        let n = e.len() as f64;
        let mean = e.iter().sum::<f64>() / n;
        let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn zero_sigma_is_silent() {
        assert_eq!(NoiseModel::gaussian(0.0, 5).draw(10).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = NoiseModel::gaussian(1.0, 42);
        assert_eq!(m.draw(100).unwrap(), m.draw(100).unwrap());
        assert_ne!(m.draw(100).unwrap(), m.for_replication(0).draw(100).unwrap());
        assert_ne!(
            m.for_replication(1).draw(8).unwrap(),
            m.for_replication(2).draw(8).unwrap()
        );
    }

    #[test]
    fn gaussian_moments() {
        let sigma = 0.3;
        let n = 20_000;
        let e = NoiseModel::gaussian(sigma, 7).draw(n).unwrap();
        let (mean, var) = moments(&e);
        assert!(mean.abs() <= 4.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() <= 0.1);
    }

    #[test]
    fn uniform_moments_and_support() {
        let sigma = 2.0;
        let n = 20_000;
        let m = NoiseModel {
            kind: NoiseKind::UniformBounded,
            sigma,
            seed: 9,
        };
        let e = m.draw(n).unwrap();
        let (mean, var) = moments(&e);
        assert!(mean.abs() <= 4.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() <= 0.1);
        assert!(e.iter().all(|v| v.abs() <= sigma * 3f64.sqrt()));
    }

    #[test]
    fn negative_sigma() {
        assert!(NoiseModel::gaussian(-1.0, 0).draw(3).is_err());
    }
}
