//! Cyclic delay-Doppler channels and additive noise.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AfdmError, Result};
use crate::metrics::shift;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    /// Delay in samples.
    pub delay: usize,
    /// Normalized Doppler.
    pub doppler: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub paths: Vec<Path>,
    pub noise_var: f64,
}

impl ChannelRealization {
    /// Single unit path with no delay or Doppler.
    pub fn awgn(noise_var: f64) -> Self {
        Self { paths: vec![Path { gain: Complex64::new(1.0, 0.0), delay: 0, doppler: 0.0 }], noise_var }
    }

    pub fn is_identity(&self) -> bool {
        self.paths.len() == 1 && {
            let p = &self.paths[0];
            p.delay == 0 && p.doppler == 0.0 && p.gain == Complex64::new(1.0, 0.0)
        }
    }

    /// Paths with profile `profile_db`; delays uniform on [0, cp - 1], Doppler
    /// uniform on [-doppler_max, doppler_max], gains circular Gaussian.
    pub fn random<R: Rng>(rng: &mut R, profile_db: &[f64], cp: usize, doppler_max: f64, noise_var: f64) -> Self {
        let paths = profile_db
            .iter()
            .map(|&db| {
                Path {
                    gain: cgauss(rng) * 10f64.powf(db / 20.0),
                    delay: rng.random_range(0..cp.max(1)),
                    doppler: if doppler_max > 0.0 { rng.random_range(-doppler_max..=doppler_max) } else { 0.0 },
                }
            })
            .collect();
        Self { paths, noise_var }
    }
}

/// Unit-variance circular complex Gaussian sample.
pub fn cgauss<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Add circular Gaussian noise of the given variance in place.
pub fn add_noise<R: Rng>(rng: &mut R, y: &mut [Complex64], var: f64) {
    if var <= 0.0 {
        return;
    }
    let s = var.sqrt();
    for z in y.iter_mut() {
        *z += cgauss(rng) * s;
    }
}

/// Noiseless sum of delayed, Doppler-shifted copies of s.
pub fn propagate(s: &[Complex64], paths: &[Path]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); s.len()];
    for p in paths {
        for (o, z) in y.iter_mut().zip(shift(s, p.delay as i64, p.doppler)) {
            *o += p.gain * z;
        }
    }
    y
}

/// Channel output with noise; errors when a delay exceeds the prefix.
pub fn doubly_selective_apply<R: Rng>(
    rng: &mut R,
    s: &[Complex64],
    ch: &ChannelRealization,
    cp: usize,
) -> Result<Vec<Complex64>> {
    if let Some(p) = ch.paths.iter().find(|p| p.delay > cp) {
        return Err(AfdmError::DelayExceedsPrefix { delay: p.delay, cp });
    }
    let mut y = propagate(s, &ch.paths);
    add_noise(rng, &mut y, ch.noise_var);
    Ok(y)
}
