//! Cyclic ambiguity function on the low-ambiguity zone, weighted ISL,
//! oversampled PAPR, CCDF statistics and the dense quadratic-form cache.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};
use crate::signal::ModulationMatrices;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Delay-Doppler sampling set with per-cell weights. The origin is excluded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LazSpec {
    pub tau_max: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub l_mu: usize,
    weights: Vec<f64>,
}

/// One cell of the zone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LazCell {
    pub tau: i64,
    pub mu: f64,
    pub weight: f64,
}

impl Default for LazSpec {
    fn default() -> Self {
        Self::new(8, -4.0, 4.0, 9).expect("reference zone is valid")
    }
}

impl LazSpec {
    pub fn new(tau_max: usize, mu_min: f64, mu_max: f64, l_mu: usize) -> Result<Self> {
        if l_mu == 0 {
            return Err(AfdmError::Config("L_mu must be at least 1".into()));
        }
        if mu_max < mu_min {
            return Err(AfdmError::Config("mu_max must not be below mu_min".into()));
        }
        let mut spec = Self { tau_max, mu_min, mu_max, l_mu, weights: Vec::new() };
        let count = spec.grid().len();
        spec.weights = vec![1.0; count];
        Ok(spec)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.weights.len() {
            return Err(AfdmError::Dimension { expected: self.weights.len(), got: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(AfdmError::Config("weights must be non-negative".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn delta_mu(&self) -> f64 {
        if self.l_mu == 1 {
            0.0
        } else {
            (self.mu_max - self.mu_min) / (self.l_mu - 1) as f64
        }
    }

    pub fn mu(&self, q: usize) -> f64 {
        self.mu_min + q as f64 * self.delta_mu()
    }

    fn grid(&self) -> Vec<(i64, f64)> {
        let t = self.tau_max as i64;
        let mut out = Vec::new();
        for tau in -t..=t {
            for q in 0..self.l_mu {
                let mu = self.mu(q);
                if tau == 0 && mu.abs() < 1e-12 {
                    continue;
                }
                out.push((tau, mu));
            }
        }
        out
    }

    /// Cells in delay-major order.
    pub fn cells(&self) -> Vec<LazCell> {
        self.grid()
            .into_iter()
            .zip(&self.weights)
            .map(|((tau, mu), &weight)| LazCell { tau, mu, weight })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Cyclic shift operator U = J_tau D(mu) applied to s.
pub fn shift(s: &[Complex64], tau: i64, mu: f64) -> Vec<Complex64> {
    let n = s.len();
    let mut out = vec![ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let k = (i as i64 - tau).rem_euclid(n as i64) as usize;
        *o = doppler(mu, k, n) * s[k];
    }
    out
}

fn doppler(mu: f64, k: usize, n: usize) -> Complex64 {
    let ph = (mu * k as f64 / n as f64).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * ph)
}

/// A_{tau,mu} = s^H J_tau D(mu) s in O(N).
pub fn ambiguity(s: &[Complex64], tau: i64, mu: f64) -> Complex64 {
    let n = s.len();
    let mut acc = ZERO;
    for (i, si) in s.iter().enumerate() {
        let k = (i as i64 - tau).rem_euclid(n as i64) as usize;
        acc += si.conj() * doppler(mu, k, n) * s[k];
    }
    acc
}

/// Ambiguity values over a zone.
#[derive(Clone, Debug)]
pub struct AfGrid {
    pub laz: LazSpec,
    pub values: Vec<Complex64>,
}

impl AfGrid {
    pub fn compute(s: &[Complex64], laz: &LazSpec) -> Self {
        let values = laz.cells().iter().map(|c| ambiguity(s, c.tau, c.mu)).collect();
        Self { laz: laz.clone(), values }
    }

    pub fn weighted_isl(&self) -> f64 {
        self.values.iter().zip(self.laz.weights()).map(|(z, w)| w * z.norm_sqr()).sum()
    }

    /// CSV body with header `tau,mu,re,im,abs2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,mu,re,im,abs2\n");
        for (c, z) in self.laz.cells().iter().zip(&self.values) {
            out.push_str(&format!("{},{},{:.17e},{:.17e},{:.17e}\n", c.tau, c.mu, z.re, z.im, z.norm_sqr()));
        }
        out
    }
}

/// Fast ambiguity evaluation on a fixed zone with tabulated Doppler phasors.
#[derive(Clone, Debug)]
pub struct AfKernel {
    n: usize,
    pub(crate) cells: Vec<LazCell>,
    /// exp(-j 2 pi mu k / N), one row of length N per cell.
    pub(crate) phasors: Vec<Complex64>,
    /// Cell ranges grouped by delay, ascending tau.
    pub(crate) groups: Vec<(i64, std::ops::Range<usize>)>,
}

impl AfKernel {
    pub fn new(n: usize, laz: &LazSpec) -> Result<Self> {
        if 2 * laz.tau_max >= n {
            return Err(AfdmError::Config(format!("tau_max {} too large for N={n}", laz.tau_max)));
        }
        let cells = laz.cells();
        let mut phasors = Vec::with_capacity(cells.len() * n);
        for c in &cells {
            phasors.extend((0..n).map(|k| doppler(c.mu, k, n)));
        }
        let mut groups: Vec<(i64, std::ops::Range<usize>)> = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            match groups.last_mut() {
                Some((tau, range)) if *tau == c.tau => range.end = i + 1,
                _ => groups.push((c.tau, i..i + 1)),
            }
        }
        Ok(Self { n, cells, phasors, groups })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[LazCell] {
        &self.cells
    }

    /// zeta over all cells.
    pub fn zetas(&self, s: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![ZERO; self.cells.len()];
        let mut lag = vec![ZERO; n];
        for (tau, range) in &self.groups {
            for (k, l) in lag.iter_mut().enumerate() {
                let i = (k as i64 + tau).rem_euclid(n as i64) as usize;
                *l = s[i].conj() * s[k];
            }
            for c in range.clone() {
                let row = &self.phasors[c * n..(c + 1) * n];
                out[c] = lag.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    pub fn weighted_isl(&self, s: &[Complex64]) -> f64 {
        self.zetas(s).iter().zip(&self.cells).map(|(z, c)| c.weight * z.norm_sqr()).sum()
    }
}

/// Weighted ISL of the waveform s = Phi v.
pub fn weighted_isl_of_samples(s: &[Complex64], laz: &LazSpec) -> f64 {
    AfGrid::compute(s, laz).weighted_isl()
}

/// Peak and mean sample power of an oversampled waveform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaprReport {
    pub peak: f64,
    pub mean: f64,
    pub linear: f64,
    pub db: f64,
}

pub fn papr_of_samples(samples: &[Complex64]) -> Result<PaprReport> {
    if samples.is_empty() {
        return Err(AfdmError::Empty);
    }
    let mut peak: f64 = 0.0;
    let mut sum = 0.0;
    for z in samples {
        let p = z.norm_sqr();
        peak = peak.max(p);
        sum += p;
    }
    let mean = sum / samples.len() as f64;
    if !(mean > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    let linear = peak / mean;
    Ok(PaprReport { peak, mean, linear, db: 10.0 * linear.log10() })
}

/// Oversampled PAPR of the effective vector v = b .* u.
pub fn papr(mm: &ModulationMatrices, v: &[Complex64]) -> Result<PaprReport> {
    papr_of_samples(&mm.synthesize_oversampled(v)?)
}

/// Empirical Pr(PAPR > gamma) for each threshold.
pub fn ccdf(samples_db: &[f64], thresholds_db: &[f64]) -> Result<Vec<f64>> {
    if samples_db.is_empty() {
        return Err(AfdmError::Empty);
    }
    let mut sorted = samples_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    Ok(thresholds_db
        .iter()
        .map(|&g| {
            let below = sorted.partition_point(|&x| x <= g);
            (sorted.len() - below) as f64 / total
        })
        .collect())
}

/// Dense quadratic forms C = Phi_b^H U Phi_b per zone cell, plus the PAPR
/// factors. Intended for small N and for cross-checking the fast kernels.
#[derive(Clone, Debug)]
pub struct QuadFormCache {
    n: usize,
    cells: Vec<LazCell>,
    c: Vec<Vec<Complex64>>,
    frob: Vec<f64>,
    /// Average-power matrix R = (1 / N L_P) sum_n G_n, row-major.
    r: Vec<Complex64>,
    /// Conjugated rows of Phi_P diag(b): the rank-1 factors of G_n.
    g_factors: Vec<Vec<Complex64>>,
    row_norms: Vec<f64>,
    fingerprint: (usize, usize, u64),
}

/// Default memory cap for dense caches.
pub const DEFAULT_CACHE_CAP: usize = 256 << 20;

impl QuadFormCache {
    pub fn build(cfg: &AfdmConfig, laz: &LazSpec, b: &[Complex64], cap_bytes: usize) -> Result<Self> {
        let n = cfg.n;
        if b.len() != n {
            return Err(AfdmError::Dimension { expected: n, got: b.len() });
        }
        let rows = n * cfg.oversampling;
        let bytes = (laz.len() * n * n + n * n + rows * n) * std::mem::size_of::<Complex64>();
        if bytes > cap_bytes {
            return Err(AfdmError::MemoryBudget { n, cap_bytes });
        }
        let mm = ModulationMatrices::new(cfg)?;
        let cells = laz.cells();
        // Columns of Phi_b.
        let mut cols = Vec::with_capacity(n);
        for m in 0..n {
            let mut e = vec![ZERO; n];
            e[m] = b[m];
            cols.push(mm.synthesize(&e)?);
        }
        let mut c = Vec::with_capacity(cells.len());
        let mut frob = Vec::with_capacity(cells.len());
        for cell in &cells {
            let mut mat = vec![ZERO; n * n];
            for (j, col) in cols.iter().enumerate() {
                let shifted = shift(col, cell.tau, cell.mu);
                for (i, coli) in cols.iter().enumerate() {
                    mat[i * n + j] = coli.iter().zip(&shifted).map(|(a, z)| a.conj() * z).sum();
                }
            }
            frob.push(mat.iter().map(|z| z.norm_sqr()).sum());
            c.push(mat);
        }
        let g_factors: Vec<Vec<Complex64>> = (0..rows)
            .map(|r| mm.phi_p_row(r).iter().zip(b).map(|(a, x)| (a * x).conj()).collect())
            .collect();
        let mut r = vec![ZERO; n * n];
        for f in &g_factors {
            for i in 0..n {
                for j in 0..n {
                    r[i * n + j] += f[i] * f[j].conj();
                }
            }
        }
        let scale = 1.0 / rows as f64;
        r.iter_mut().for_each(|z| *z *= scale);
        let row_norms = mm.row_norms().to_vec();
        Ok(Self { n, cells, c, frob, r, g_factors, row_norms, fingerprint: fingerprint(cfg, laz) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[LazCell] {
        &self.cells
    }

    /// Dense C for cell k, row-major.
    pub fn c(&self, k: usize) -> &[Complex64] {
        &self.c[k]
    }

    pub fn frobenius_sq(&self) -> &[f64] {
        &self.frob
    }

    pub fn r_matrix(&self) -> &[Complex64] {
        &self.r
    }

    pub fn g_factor(&self, row: usize) -> &[Complex64] {
        &self.g_factors[row]
    }

    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn check(&self, cfg: &AfdmConfig, laz: &LazSpec) -> Result<()> {
        if self.fingerprint != fingerprint(cfg, laz) {
            return Err(AfdmError::CacheMismatch);
        }
        Ok(())
    }

    /// u^H C_k u.
    pub fn quad(&self, k: usize, u: &[Complex64]) -> Complex64 {
        quad_form(&self.c[k], u)
    }

    /// Sum of w |u^H C u|^2 over the zone.
    pub fn weighted_isl(&self, u: &[Complex64]) -> Result<f64> {
        if u.len() != self.n {
            return Err(AfdmError::Dimension { expected: self.n, got: u.len() });
        }
        Ok((0..self.cells.len()).map(|k| self.cells[k].weight * self.quad(k, u).norm_sqr()).sum())
    }

    /// max_n |f_n^H u|^2 / (u^H R u).
    pub fn papr(&self, u: &[Complex64]) -> Result<PaprReport> {
        let peak = self
            .g_factors
            .iter()
            .map(|f| f.iter().zip(u).map(|(a, z)| a.conj() * z).sum::<Complex64>().norm_sqr())
            .fold(0.0, f64::max);
        let mean = quad_form(&self.r, u).re;
        if !(mean > 0.0) {
            return Err(AfdmError::ZeroPower);
        }
        let linear = peak / mean;
        Ok(PaprReport { peak, mean, linear, db: 10.0 * linear.log10() })
    }
}

/// x^H M x for a row-major square matrix.
pub fn quad_form(m: &[Complex64], x: &[Complex64]) -> Complex64 {
    let n = x.len();
    let mut acc = ZERO;
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mx: Complex64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        acc += x[i].conj() * mx;
    }
    acc
}

fn fingerprint(cfg: &AfdmConfig, laz: &LazSpec) -> (usize, usize, u64) {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut mix = |x: u64| {
        h ^= x;
        h = h.wrapping_mul(0x0100_0000_01b3);
    };
    mix(cfg.c1.to_bits());
    mix(cfg.oversampling as u64);
    mix(laz.tau_max as u64);
    mix(laz.mu_min.to_bits());
    mix(laz.mu_max.to_bits());
    mix(laz.l_mu as u64);
    for w in laz.weights() {
        mix(w.to_bits());
    }
    (cfg.n, laz.len(), h)
}
