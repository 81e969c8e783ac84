//! Reference waveforms: conventional AFDM and the greedy single-sweep
//! pre-chirp selection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::AfdmConfig;
use crate::error::Result;
use crate::signal::{DesignVector, ModulationMatrices};

/// Random constellation symbols on every subcarrier with the first alphabet
/// point as common pre-chirp.
///
/// On a configuration with reserved subcarriers, the reserved entries carry
/// the drawn symbol directly in u, so the waveform equals the full-data
/// conventional waveform and serves as the optimizer starting point.
pub fn conventional_afdm(cfg: &AfdmConfig, seed: u64) -> DesignVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = cfg.constellation.order();
    let symbols: Vec<usize> = (0..cfg.n).map(|_| rng.random_range(0..order)).collect();
    let mask = cfg.partition.reserved_mask();
    let u = (0..cfg.n)
        .map(|m| {
            let base = cfg.alphabet.points(m)[0];
            if mask[m] {
                base * cfg.constellation.point(symbols[m])
            } else {
                base
            }
        })
        .collect();
    DesignVector { u, symbols, prechirp: vec![0; cfg.n] }
}

/// One ascending sweep over the data subcarriers, picking for each the
/// alphabet point that minimizes the oversampled PAPR of the whole waveform.
pub fn gps_sweep(cfg: &AfdmConfig, mm: &ModulationMatrices, init: &DesignVector) -> Result<DesignVector> {
    let mut out = init.clone();
    let b = init.b(cfg);
    let v: Vec<Complex64> = b.iter().zip(&init.u).map(|(x, y)| x * y).collect();
    let mut sp = mm.synthesize_oversampled(&v)?;
    let rows = mm.rows();
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    let mut trial = vec![Complex64::new(0.0, 0.0); rows];
    for &m in cfg.partition.data() {
        for (r, c) in col.iter_mut().enumerate() {
            *c = mm.phi_p_row(r)[m] * b[m];
        }
        let current = out.u[m];
        let mut best = papr_linear(&sp);
        let mut choice: Option<(usize, Complex64)> = None;
        for (l, p) in cfg.alphabet.points(m).into_iter().enumerate() {
            let delta = p - current;
            if delta.norm_sqr() == 0.0 {
                continue;
            }
            for ((t, s), c) in trial.iter_mut().zip(&sp).zip(&col) {
                *t = s + c * delta;
            }
            let val = papr_linear(&trial);
            if val < best {
                best = val;
                choice = Some((l, p));
            }
        }
        if let Some((l, p)) = choice {
            let delta = p - current;
            for (s, c) in sp.iter_mut().zip(&col) {
                *s += c * delta;
            }
            out.u[m] = p;
            out.prechirp[m] = l;
        }
    }
    Ok(out)
}

fn papr_linear(s: &[Complex64]) -> f64 {
    let mut peak: f64 = 0.0;
    let mut sum = 0.0;
    for z in s {
        let p = z.norm_sqr();
        peak = peak.max(p);
        sum += p;
    }
    peak * s.len() as f64 / sum
}
