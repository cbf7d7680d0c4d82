use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dataset::{Dataset, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub classes: usize,
    pub input_dim: usize,
    pub attributes: usize,
    pub per_class: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// The 20-class, 32-dimensional planted set used throughout the tests.
    pub fn acceptance(seed: u64) -> Self {
        SyntheticConfig {
            classes: 20,
            input_dim: 32,
            attributes: 16,
            per_class: 50,
            noise_sigma: 0.3,
            seed,
        }
    }
}

/// Draws a class prototype `mu_c = nu_c + B (2 a_c - 1)` per class, where
/// `nu_c ~ N(0, I)` carries identity, `a_c` is a fair-coin attribute vector
/// and `B` has `N(0, 1/s)` entries, so both labels are linear in `x`.
/// Samples are `mu_c` plus isotropic Gaussian noise, shuffled with the
/// same seed.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    let SyntheticConfig {
        classes,
        input_dim: p,
        attributes: s,
        per_class,
        noise_sigma,
        seed,
    } = *cfg;
    if classes == 0 || p == 0 || s == 0 || per_class == 0 {
        return Err(Error::Config("synthetic dataset sizes must be positive".into()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Config(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };

    let mix_scale = 1.0 / (s as f64).sqrt();
    let mix: Vec<f64> = (0..p * s).map(|_| normal(&mut rng) * mix_scale).collect();

    let mut prototypes = Vec::with_capacity(classes);
    for _ in 0..classes {
        let attrs: Vec<u8> = (0..s).map(|_| rng.random_bool(0.5) as u8).collect();
        let mut mu: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
        for (i, m) in mu.iter_mut().enumerate() {
            for (j, &a) in attrs.iter().enumerate() {
                *m += mix[i * s + j] * (2.0 * f64::from(a) - 1.0);
            }
        }
        prototypes.push((mu, attrs));
    }

    let mut samples = Vec::with_capacity(classes * per_class);
    for (label, (mu, attrs)) in prototypes.iter().enumerate() {
        for _ in 0..per_class {
            let x = mu
                .iter()
                .map(|&m| (m + noise_sigma * normal(&mut rng)) as f32)
                .collect();
            samples.push(Sample {
                x,
                label,
                attributes: attrs.clone(),
            });
        }
    }
    samples.shuffle(&mut rng);
    Dataset::new(p, s, classes, samples)
}
