//! AFDM signal model: modulation matrices, symbol-rate and oversampled
//! synthesis, the frequency-wrapping index and spectral-efficiency accounting.
//!
//! The transmit samples are `s = Phi (b .* u)` where `b` holds the data
//! symbols (1 on reserved subcarriers) and `u` is the design vector. With
//! unit-modulus `b` the columns of `Phi diag(b)` stay orthonormal, so every
//! operator below works on the effective vector `v = b .* u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Precomputed modulation operators for one configuration.
#[derive(Clone)]
pub struct ModulationMatrices {
    n: usize,
    lp: usize,
    c1: f64,
    /// Oversampled chirp basis, row-major (N L_P) x N.
    phi_p: Vec<Complex64>,
    row_norms: Vec<f64>,
    chirp: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ModulationMatrices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulationMatrices")
            .field("n", &self.n)
            .field("oversampling", &self.lp)
            .field("c1", &self.c1)
            .finish()
    }
}

impl ModulationMatrices {
    pub fn new(cfg: &AfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n;
        let lp = cfg.oversampling;
        let rows = n * lp;
        let scale = 1.0 / ((n * lp) as f64).sqrt();
        let mut phi_p = Vec::with_capacity(rows * n);
        for r in 0..rows {
            let x = r as f64 / lp as f64;
            let t = x * cfg.dt();
            let quad = (cfg.c1 * x * x).rem_euclid(1.0);
            for m in 0..n {
                let q = wrap_index(cfg, m, t)?;
                // Reduce each phase term modulo one before summing to keep precision.
                let lin = (m as f64 * x / n as f64).rem_euclid(1.0);
                let wrap = (q as f64 * x).rem_euclid(1.0);
                phi_p.push(Complex64::from_polar(scale, 2.0 * PI * (quad + lin - wrap)));
            }
        }
        let row_norms = phi_p.chunks(n).map(|row| row.iter().map(|z| z.norm_sqr()).sum()).collect();
        let chirp = (0..n)
            .map(|i| {
                let ph = (cfg.c1 * (i * i) as f64).rem_euclid(1.0);
                Complex64::from_polar(1.0, 2.0 * PI * ph)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            lp,
            c1: cfg.c1,
            phi_p,
            row_norms,
            chirp,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.lp
    }

    pub fn rows(&self) -> usize {
        self.n * self.lp
    }

    /// Row n of the oversampled basis.
    pub fn phi_p_row(&self, r: usize) -> &[Complex64] {
        &self.phi_p[r * self.n..(r + 1) * self.n]
    }

    /// Squared norms of the oversampled basis rows.
    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    /// Dense symbol-rate basis Phi (with b = 1), row-major N x N.
    pub fn phi_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for m in 0..n {
                let ph = ((i * m) % n) as f64 / n as f64;
                out.push(self.chirp[i] * Complex64::from_polar(scale, 2.0 * PI * ph));
            }
        }
        out
    }

    /// s = Phi v through one inverse FFT.
    pub fn synthesize(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(v.len(), self.n)?;
        let mut buf = v.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        for (z, c) in buf.iter_mut().zip(&self.chirp) {
            *z *= c * scale;
        }
        Ok(buf)
    }

    /// Phi^H y through one forward FFT.
    pub fn analyze(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(y.len(), self.n)?;
        let scale = 1.0 / (self.n as f64).sqrt();
        let mut buf: Vec<Complex64> = y.iter().zip(&self.chirp).map(|(z, c)| z * c.conj() * scale).collect();
        self.fwd.process(&mut buf);
        Ok(buf)
    }

    /// Oversampled samples Phi_P v.
    pub fn synthesize_oversampled(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(v.len(), self.n)?;
        let mut out = vec![ZERO; self.rows()];
        self.phi_p_mul(v, &mut out);
        Ok(out)
    }

    pub(crate) fn phi_p_mul(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (o, row) in out.iter_mut().zip(self.phi_p.chunks_exact(self.n)) {
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    /// Phi_P^H y.
    pub fn analyze_oversampled(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(y.len(), self.rows())?;
        let mut out = vec![ZERO; self.n];
        self.phi_p_adjoint_mul(y, &mut out);
        Ok(out)
    }

    pub(crate) fn phi_p_adjoint_mul(&self, y: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        for (yr, row) in y.iter().zip(self.phi_p.chunks_exact(self.n)) {
            if *yr == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yr;
            }
        }
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(AfdmError::Dimension { expected, got });
    }
    Ok(())
}

/// Element-wise product b .* u.
pub fn effective(b: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
    b.iter().zip(u).map(|(x, y)| x * y).collect()
}

/// Design vector with its data realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    pub u: Vec<Complex64>,
    /// Constellation index per subcarrier; ignored on reserved subcarriers.
    pub symbols: Vec<usize>,
    /// Alphabet index per subcarrier; meaningful on data subcarriers.
    pub prechirp: Vec<usize>,
}

impl DesignVector {
    /// Data symbols b with 1 on reserved subcarriers.
    pub fn b(&self, cfg: &AfdmConfig) -> Vec<Complex64> {
        let mask = cfg.partition.reserved_mask();
        self.symbols
            .iter()
            .zip(&mask)
            .map(|(&k, &r)| if r { Complex64::new(1.0, 0.0) } else { cfg.constellation.point(k) })
            .collect()
    }

    pub fn effective(&self, cfg: &AfdmConfig) -> Vec<Complex64> {
        effective(&self.b(cfg), &self.u)
    }

    pub fn energy(&self) -> f64 {
        self.u.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Re-derive alphabet indices from the current data entries.
    pub fn refresh_prechirp(&mut self, cfg: &AfdmConfig) {
        for &m in cfg.partition.data() {
            self.prechirp[m] = cfg.alphabet.nearest(m, self.u[m]);
        }
    }
}

/// Breakpoint t_{m,q} of the frequency-wrapping index.
pub fn wrap_breakpoint(cfg: &AfdmConfig, m: usize, q: usize) -> f64 {
    if q == 0 {
        return 0.0;
    }
    let a = cfg.c1_prime();
    let f = m as f64 / cfg.period;
    (-f + (f * f + 4.0 * a * q as f64 / cfg.dt()).sqrt()) / (2.0 * a)
}

/// Wrapping index q with t_{m,q} <= t < t_{m,q+1}, saturating at C = 2 N c1.
pub fn wrap_index(cfg: &AfdmConfig, m: usize, t: f64) -> Result<usize> {
    if !(0.0..cfg.period).contains(&t) {
        return Err(AfdmError::TimeOutOfRange { t, period: cfg.period });
    }
    let c = cfg.wraps();
    if c == 0 {
        return Ok(0);
    }
    let x = t / cfg.dt();
    let guess = (cfg.c1 * x * x + m as f64 * x / cfg.n as f64).floor().max(0.0);
    let mut q = (guess as usize).min(c);
    while q < c && wrap_breakpoint(cfg, m, q + 1) <= t {
        q += 1;
    }
    while q > 0 && wrap_breakpoint(cfg, m, q) > t {
        q -= 1;
    }
    Ok(q)
}

/// |D| / (N + B_SI / log2|X|), with B_SI = |D| log2 L when pre-chirps are optimized.
pub fn effective_spectral_efficiency(cfg: &AfdmConfig, constellation_bits: u32, prechirp_optimized: bool) -> f64 {
    let d = cfg.partition.data().len() as f64;
    if d == 0.0 {
        return 0.0;
    }
    let side = if prechirp_optimized { d * (cfg.alphabet.size as f64).log2() } else { 0.0 };
    d / (cfg.n as f64 + side / constellation_bits as f64)
}
