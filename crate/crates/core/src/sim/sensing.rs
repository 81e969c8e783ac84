//! Matched-filter delay-Doppler maps and cell-averaging CFAR.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AfdmError, Result};

/// Nonnegative map over a delay grid (rows) and Doppler grid (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct RdMap {
    pub taus: Vec<i64>,
    pub mus: Vec<f64>,
    pub values: Vec<f64>,
}

impl RdMap {
    pub fn rows(&self) -> usize {
        self.taus.len()
    }

    pub fn cols(&self) -> usize {
        self.mus.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    /// Grid position of (tau, mu), if present.
    pub fn index_of(&self, tau: i64, mu: f64) -> Option<(usize, usize)> {
        let i = self.taus.iter().position(|&t| t == tau)?;
        let j = self.mus.iter().position(|&m| (m - mu).abs() < 1e-12)?;
        Some((i, j))
    }
}

/// |<U_{tau,mu} s_ref, y>|^2 for every grid cell.
pub fn range_doppler_map(s_ref: &[Complex64], y: &[Complex64], taus: &[i64], mus: &[f64]) -> RdMap {
    let n = s_ref.len();
    let phasors: Vec<Vec<Complex64>> = mus
        .iter()
        .map(|&mu| (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (mu * k as f64 / n as f64).rem_euclid(1.0))).collect())
        .collect();
    let mut values = Vec::with_capacity(taus.len() * mus.len());
    let mut lag = vec![Complex64::new(0.0, 0.0); n];
    for &tau in taus {
        for (k, l) in lag.iter_mut().enumerate() {
            *l = s_ref[k].conj() * y[(k as i64 + tau).rem_euclid(n as i64) as usize];
        }
        for ph in &phasors {
            let acc: Complex64 = lag.iter().zip(ph).map(|(a, b)| a * b).sum();
            values.push(acc.norm_sqr());
        }
    }
    RdMap { taus: taus.to_vec(), mus: mus.to_vec(), values }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfarConfig {
    pub guard_tau: usize,
    pub guard_mu: usize,
    pub train_tau: usize,
    pub train_mu: usize,
    pub pfa: f64,
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self { guard_tau: 2, guard_mu: 2, train_tau: 8, train_mu: 8, pfa: 1e-3 }
    }
}

impl CfarConfig {
    pub fn with_pfa(self, pfa: f64) -> Self {
        Self { pfa, ..self }
    }

    fn outer(&self) -> (usize, usize) {
        (self.guard_tau + self.train_tau, self.guard_mu + self.train_mu)
    }

    pub fn training_cells(&self) -> usize {
        let (ot, om) = self.outer();
        (2 * ot + 1) * (2 * om + 1) - (2 * self.guard_tau + 1) * (2 * self.guard_mu + 1)
    }

    /// Threshold multiplier for exponentially distributed cells.
    pub fn alpha(&self) -> f64 {
        let nt = self.training_cells() as f64;
        nt * (self.pfa.powf(-1.0 / nt) - 1.0)
    }
}

/// Detection mask with a cyclic sliding window.
pub fn ca_cfar(map: &RdMap, cfg: &CfarConfig) -> Result<Vec<bool>> {
    let (rows, cols) = (map.rows(), map.cols());
    let (ot, om) = cfg.outer();
    if 2 * ot + 1 > rows || 2 * om + 1 > cols {
        return Err(AfdmError::WindowTooLarge { window: (2 * ot + 1).max(2 * om + 1), rows, cols });
    }
    if !(cfg.pfa > 0.0 && cfg.pfa < 1.0) || cfg.training_cells() == 0 {
        return Err(AfdmError::Config(format!("invalid CFAR settings {cfg:?}")));
    }
    let alpha = cfg.alpha();
    let nt = cfg.training_cells() as f64;
    // Cyclic 2-D prefix sums give each window sum in O(1).
    let w = cols + 1;
    let mut sat = vec![0.0; (rows + 1) * w];
    for i in 0..rows {
        for j in 0..cols {
            sat[(i + 1) * w + j + 1] = map.get(i, j) + sat[i * w + j + 1] + sat[(i + 1) * w + j] - sat[i * w + j];
        }
    }
    let rect = |r0: usize, r1: usize, c0: usize, c1: usize| sat[r1 * w + c1] - sat[r0 * w + c1] - sat[r1 * w + c0] + sat[r0 * w + c0];
    // Sum over a cyclic window centered at (i, j) with half-widths (a, b).
    let window = |i: usize, j: usize, a: usize, b: usize| -> f64 {
        let rs = cyclic_ranges(i, a, rows);
        let cs = cyclic_ranges(j, b, cols);
        let mut s = 0.0;
        for &(r0, r1) in &rs {
            for &(c0, c1) in &cs {
                s += rect(r0, r1, c0, c1);
            }
        }
        s
    };
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let outer = window(i, j, ot, om);
            let inner = window(i, j, cfg.guard_tau, cfg.guard_mu);
            let noise = (outer - inner) / nt;
            out.push(map.get(i, j) > alpha * noise);
        }
    }
    Ok(out)
}

/// Split the cyclic interval [c - h, c + h] into at most two half-open ranges.
fn cyclic_ranges(c: usize, h: usize, len: usize) -> Vec<(usize, usize)> {
    let lo = c as i64 - h as i64;
    let hi = c as i64 + h as i64 + 1;
    let len_i = len as i64;
    if lo >= 0 && hi <= len_i {
        vec![(lo as usize, hi as usize)]
    } else if lo < 0 {
        vec![((lo + len_i) as usize, len), (0, hi as usize)]
    } else {
        vec![(lo as usize, len), (0, (hi - len_i) as usize)]
    }
}
