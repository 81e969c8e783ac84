//! Linear surrogate of the weighted ISL around the current iterate.

use num_complex::Complex64;

use crate::error::Result;
use crate::metrics::{AfKernel, LazSpec};
use crate::signal::ModulationMatrices;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linear surrogate `2 Re{coeff^H u}` stored as `coeff = grad - damping * u_r`.
#[derive(Clone, Debug, Default)]
pub struct LinearTerm {
    pub grad: Vec<Complex64>,
    pub damping: f64,
}

impl LinearTerm {
    pub fn zero(n: usize) -> Self {
        Self { grad: vec![ZERO; n], damping: 0.0 }
    }

    /// The surrogate coefficient itself.
    pub fn coeff(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.grad.iter().zip(u).map(|(g, z)| g - z * self.damping).collect()
    }

    /// self + w * other.
    pub fn add_scaled(&self, other: &LinearTerm, w: f64) -> LinearTerm {
        LinearTerm {
            grad: self.grad.iter().zip(&other.grad).map(|(a, b)| a + b * w).collect(),
            damping: self.damping + w * other.damping,
        }
    }
}

/// Waveform and ambiguity values at one iterate.
#[derive(Clone, Debug)]
pub struct IslPoint {
    pub s: Vec<Complex64>,
    pub zetas: Vec<Complex64>,
    pub isl: f64,
}

/// ISL surrogate builder for a fixed zone.
#[derive(Clone, Debug)]
pub struct IslModel {
    kernel: AfKernel,
    lambda_j: f64,
}

impl IslModel {
    pub fn new(n: usize, laz: &LazSpec) -> Result<Self> {
        let kernel = AfKernel::new(n, laz)?;
        let lambda_j = lambda_j_bound(&kernel);
        Ok(Self { kernel, lambda_j })
    }

    pub fn kernel(&self) -> &AfKernel {
        &self.kernel
    }

    /// Upper bound on the largest eigenvalue of sum w v v^H.
    pub fn lambda_j(&self) -> f64 {
        self.lambda_j
    }

    pub fn point(&self, mm: &ModulationMatrices, v: &[Complex64]) -> Result<IslPoint> {
        let s = mm.synthesize(v)?;
        let zetas = self.kernel.zetas(&s);
        let isl = zetas.iter().zip(self.kernel.cells()).map(|(z, c)| c.weight * z.norm_sqr()).sum();
        Ok(IslPoint { s, zetas, isl })
    }

    /// Surrogate at `u` given its waveform point; b are the data symbols.
    pub fn linearize(
        &self,
        mm: &ModulationMatrices,
        b: &[Complex64],
        u: &[Complex64],
        pt: &IslPoint,
    ) -> Result<LinearTerm> {
        let n = self.kernel.n();
        let y = self.hermitian_action(&pt.s, &pt.zetas);
        let back = mm.analyze(&y)?;
        let grad = back.iter().zip(b).map(|(z, x)| 2.0 * z * x.conj()).collect();
        let lambda_q = self.lambda_q(&pt.zetas);
        debug_assert_eq!(u.len(), n);
        Ok(LinearTerm { grad, damping: 2.0 * (self.lambda_j * n as f64 + lambda_q) })
    }

    /// y = 1/2 sum w (conj(zeta) U s + zeta U^H s).
    fn hermitian_action(&self, s: &[Complex64], zetas: &[Complex64]) -> Vec<Complex64> {
        let n = self.kernel.n();
        let k = &self.kernel;
        let mut y = vec![ZERO; n];
        for (tau, range) in &k.groups {
            for c in range.clone() {
                let w = 0.5 * k.cells[c].weight;
                if w == 0.0 {
                    continue;
                }
                let row = &k.phasors[c * n..(c + 1) * n];
                let zc = zetas[c].conj() * w;
                let z = zetas[c] * w;
                for i in 0..n {
                    let src = (i as i64 - tau).rem_euclid(n as i64) as usize;
                    let fwd = (i as i64 + tau).rem_euclid(n as i64) as usize;
                    y[i] += zc * row[src] * s[src] + z * row[i].conj() * s[fwd];
                }
            }
        }
        y
    }

    /// Gershgorin bound on 1/2 sum w (conj(zeta) U + zeta U^H), which is
    /// unitarily similar to the Hermitian part of sum w conj(zeta) C.
    pub fn lambda_q(&self, zetas: &[Complex64]) -> f64 {
        let n = self.kernel.n();
        let k = &self.kernel;
        let mut offsets: Vec<i64> = Vec::new();
        for (tau, _) in &k.groups {
            offsets.push(*tau);
            offsets.push(-tau);
        }
        offsets.sort_unstable();
        offsets.dedup();
        let group = |t: i64| k.groups.iter().find(|(tau, _)| *tau == t).map(|(_, r)| r.clone());
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut entry = vec![ZERO; n];
        for &t in &offsets {
            entry.iter_mut().for_each(|z| *z = ZERO);
            if let Some(r) = group(t) {
                for c in r {
                    let a = zetas[c].conj() * (0.5 * k.cells[c].weight);
                    let row = &k.phasors[c * n..(c + 1) * n];
                    for (i, e) in entry.iter_mut().enumerate() {
                        *e += a * row[(i as i64 - t).rem_euclid(n as i64) as usize];
                    }
                }
            }
            if let Some(r) = group(-t) {
                for c in r {
                    let a = zetas[c] * (0.5 * k.cells[c].weight);
                    let row = &k.phasors[c * n..(c + 1) * n];
                    for (i, e) in entry.iter_mut().enumerate() {
                        *e += a * row[i].conj();
                    }
                }
            }
            if t == 0 {
                for (d, e) in diag.iter_mut().zip(&entry) {
                    *d = e.re;
                }
            } else {
                for (o, e) in off.iter_mut().zip(&entry) {
                    *o += e.norm();
                }
            }
        }
        diag.iter().zip(&off).map(|(d, o)| d + o).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// min(trace bound, Gershgorin on the weighted Gram of vec(C) vectors).
///
/// With unit-modulus data, <vec C_a, vec C_b> = tr(U_a^H U_b), which vanishes
/// across delays and reduces to a Doppler phasor sum within a delay.
fn lambda_j_bound(k: &AfKernel) -> f64 {
    let n = k.n();
    let trace: f64 = k.cells.iter().map(|c| c.weight * n as f64).sum();
    let mut gersh: f64 = 0.0;
    for (_, range) in &k.groups {
        for a in range.clone() {
            let wa = k.cells[a].weight.sqrt();
            let ra = &k.phasors[a * n..(a + 1) * n];
            let mut row = 0.0;
            for b in range.clone() {
                let rb = &k.phasors[b * n..(b + 1) * n];
                let g: Complex64 = ra.iter().zip(rb).map(|(x, y)| x.conj() * y).sum();
                row += k.cells[b].weight.sqrt() * g.norm();
            }
            gersh = gersh.max(wa * row);
        }
    }
    trace.min(gersh)
}
