//! The two majorization lemmas behind every surrogate in the optimizer.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{AfdmError, Result};

/// Quadratic majorizer of a Hermitian form around `q0`.
///
/// Returns `(q^H Y q, q^H Z q + 2 Re{q0^H (Y - Z) q} + q0^H (Z - Y) q0)`;
/// the second value bounds the first whenever `Z - Y` is PSD.
pub fn lemma1_check(
    y: &DMatrix<Complex64>,
    z: &DMatrix<Complex64>,
    q0: &DVector<Complex64>,
    q: &DVector<Complex64>,
) -> Result<(f64, f64)> {
    let diff = z - y;
    let scale = diff.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let min_eig = diff.clone().symmetric_eigenvalues().min();
    if min_eig < -1e-10 * scale {
        return Err(AfdmError::NotPsd(min_eig));
    }
    let lhs = q.dotc(&(y * q)).re;
    let cross = q0.dotc(&(-&diff * q)).re;
    let rhs = q.dotc(&(z * q)).re + 2.0 * cross + q0.dotc(&(&diff * q0)).re;
    Ok((lhs, rhs))
}

/// Coefficients of the quadratic `alpha x^2 + beta x + gamma` that majorizes
/// `x^ell` on `[0, t]`, touching at `x0` and at `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerMajorant {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PowerMajorant {
    pub fn eval(&self, x: f64) -> f64 {
        (self.alpha * x + self.beta) * x + self.gamma
    }
}

pub fn lemma2_coeffs(x0: f64, t: f64, ell: u32) -> Result<PowerMajorant> {
    if ell < 2 {
        return Err(AfdmError::Config(format!("exponent {ell} must be at least 2")));
    }
    if !(x0 >= 0.0 && x0 < t) {
        return Err(AfdmError::BoundViolation { x0, t });
    }
    let alpha = power_alpha(x0, t, ell);
    let x_pow = x0.powi(ell as i32 - 1);
    let beta = ell as f64 * x_pow - 2.0 * alpha * x0;
    let gamma = alpha * x0 * x0 - (ell as f64 - 1.0) * x_pow * x0;
    Ok(PowerMajorant { alpha, beta, gamma })
}

/// (t^l - x0^l - l x0^(l-1) (t - x0)) / (t - x0)^2, summed as the positive
/// binomial tail so that x0 near t does not cancel.
pub(crate) fn power_alpha(x0: f64, t: f64, ell: u32) -> f64 {
    let h = t - x0;
    let l = ell as usize;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=l {
        if k >= 2 {
            sum += binom * x0.powi((l - k) as i32) * h.powi(k as i32 - 2);
        }
        binom = binom * (l - k) as f64 / (k + 1) as f64;
    }
    sum
}
