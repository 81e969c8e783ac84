//! Linear surrogate of the normalized peak-power moment.
//!
//! Samples are measured against a reference level `gamma_p`, so the working
//! variable is `x_n = |s_P[n]|^2 / gamma_p` and the penalty is
//! `(sum x^ell - N L_P)^2`.

use num_complex::Complex64;

use super::isl::LinearTerm;
use super::majorize::lemma2_coeffs;
use crate::error::Result;
use crate::signal::ModulationMatrices;

/// Fixed geometry of the oversampled basis used by the PAPR bounds.
#[derive(Clone, Debug)]
pub struct PaprGeometry {
    rows: usize,
    n: usize,
    /// |Phi_P Phi_P^H|^2, row-major, when within the memory budget.
    h: Option<Vec<f64>>,
    row_norms: Vec<f64>,
    /// Bound on the largest eigenvalue of Phi_P^H Phi_P.
    nu: f64,
}

impl PaprGeometry {
    pub fn new(mm: &ModulationMatrices, cap_bytes: usize) -> Self {
        let rows = mm.rows();
        let n = mm.n();
        let row_norms = mm.row_norms().to_vec();
        let dense_ok = rows * rows * std::mem::size_of::<f64>() <= cap_bytes;
        let h = dense_ok.then(|| {
            let mut h = vec![0.0; rows * rows];
            for i in 0..rows {
                let ri = mm.phi_p_row(i);
                for j in i..rows {
                    let rj = mm.phi_p_row(j);
                    let g: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                    let v = g.norm_sqr();
                    h[i * rows + j] = v;
                    h[j * rows + i] = v;
                }
            }
            h
        });
        let trace: f64 = row_norms.iter().sum();
        let nu = if dense_ok { gram_gershgorin(mm).min(trace) } else { trace };
        Self { rows, n, h, row_norms, nu }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Bound on the largest eigenvalue of sum alpha_n (f_n f_n^H) kron (f_n f_n^H).
    pub fn lambda_l(&self, alpha: &[f64]) -> f64 {
        let trace: f64 = alpha.iter().zip(&self.row_norms).map(|(a, r)| a * r * r).sum();
        let Some(h) = &self.h else { return trace };
        let sa: Vec<f64> = alpha.iter().map(|a| a.sqrt()).collect();
        let mut best: f64 = 0.0;
        for (i, row) in h.chunks_exact(self.rows).enumerate() {
            let acc: f64 = row.iter().zip(&sa).map(|(x, y)| x * y).sum();
            best = best.max(sa[i] * acc);
        }
        trace.min(best)
    }
}

fn gram_gershgorin(mm: &ModulationMatrices) -> f64 {
    let n = mm.n();
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..mm.rows() {
        let row = mm.phi_p_row(r);
        for i in 0..n {
            let a = row[i].conj();
            for j in 0..n {
                gram[i * n + j] += a * row[j];
            }
        }
    }
    gram.chunks_exact(n).map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Oversampled samples and normalized powers at one iterate.
#[derive(Clone, Debug)]
pub struct PaprPoint {
    pub sp: Vec<Complex64>,
    /// |s_P|^2 / gamma_p.
    pub x: Vec<f64>,
    pub gamma_p: f64,
}

impl PaprPoint {
    pub fn new(mm: &ModulationMatrices, v: &[Complex64], gamma_p: f64) -> Result<Self> {
        let sp = mm.synthesize_oversampled(v)?;
        let x = sp.iter().map(|z| z.norm_sqr() / gamma_p).collect();
        Ok(Self { sp, x, gamma_p })
    }

    pub fn peak(&self) -> f64 {
        self.x.iter().cloned().fold(0.0, f64::max) * self.gamma_p
    }

    pub fn papr_db(&self) -> f64 {
        let mean = self.x.iter().sum::<f64>() / self.x.len() as f64;
        10.0 * (self.x.iter().cloned().fold(0.0, f64::max) / mean).log10()
    }

    /// sum x^ell.
    pub fn moment(&self, ell: u32) -> f64 {
        self.x.iter().map(|x| x.powi(ell as i32)).sum()
    }
}

/// Surrogate of the moment penalty around `pt`, valid while every sample power
/// stays below `t_p` (absolute units).
pub fn linearize(
    mm: &ModulationMatrices,
    geom: &PaprGeometry,
    b: &[Complex64],
    u: &[Complex64],
    pt: &PaprPoint,
    t_p: f64,
    ell: u32,
    strict: bool,
) -> Result<LinearTerm> {
    let t = t_p / pt.gamma_p;
    let rows = geom.rows as f64;
    let n = geom.n as f64;
    let mut alpha = Vec::with_capacity(pt.x.len());
    let mut kappa = Vec::with_capacity(pt.x.len());
    let mut sum_gamma = 0.0;
    let mut sum_ax2 = 0.0;
    for &x in &pt.x {
        let c = lemma2_coeffs(x, t, ell)?;
        alpha.push(c.alpha);
        kappa.push(2.0 * c.alpha * x + c.beta);
        sum_gamma += c.gamma;
        sum_ax2 += c.alpha * x * x;
    }
    let e = pt.moment(ell) - rows;
    let a = (rows - sum_gamma + sum_ax2) / n;
    let lambda_l = geom.lambda_l(&alpha) / (pt.gamma_p * pt.gamma_p);
    let e3 = a - 2.0 * lambda_l * n;
    let kappa_max = kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lambda_3 = if e >= 0.0 {
        2.0 * e * (kappa_max * geom.nu / pt.gamma_p - e3).max(0.0)
    } else {
        2.0 * e.abs() * a.max(0.0)
    };
    if strict {
        // Curvature of the square itself: the constraint form changes by at
        // most spread * |u - u_r| * 2 sqrt(N) on the sphere.
        let spread = kappa_max.max(0.0) * geom.nu / pt.gamma_p + 2.0 * lambda_l * n;
        lambda_3 += n * spread * spread;
    }
    let weighted: Vec<Complex64> = pt.sp.iter().zip(&kappa).map(|(s, k)| s * *k).collect();
    let back = mm.analyze_oversampled(&weighted)?;
    let grad = back
        .iter()
        .zip(b)
        .zip(u)
        .map(|((k, x), z)| 2.0 * e * (x.conj() * k / pt.gamma_p - z * a))
        .collect();
    Ok(LinearTerm { grad, damping: lambda_3 })
}
