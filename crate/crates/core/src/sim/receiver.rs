//! Linear MMSE equalization in the DAFT domain with perfect channel knowledge.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::channel::{propagate, ChannelRealization};
use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};
use crate::signal::ModulationMatrices;

/// Per-subcarrier multipliers known to the receiver: the pre-chirp point on
/// data subcarriers and 1 on reserved ones, whose content is estimated and
/// discarded.
pub fn known_prechirp(cfg: &AfdmConfig, u: &[Complex64]) -> Vec<Complex64> {
    let mask = cfg.partition.reserved_mask();
    u.iter().zip(&mask).map(|(z, &r)| if r { Complex64::new(1.0, 0.0) } else { *z }).collect()
}

/// MMSE estimates of the symbols on every subcarrier.
pub fn mmse_estimate(
    mm: &ModulationMatrices,
    y: &[Complex64],
    ch: &ChannelRealization,
    prechirp: &[Complex64],
    noise_var: f64,
) -> Result<Vec<Complex64>> {
    let n = mm.n();
    if y.len() != n || prechirp.len() != n {
        return Err(AfdmError::Dimension { expected: n, got: y.len().min(prechirp.len()) });
    }
    if ch.is_identity() {
        let back = mm.analyze(y)?;
        let scale = 1.0 / (1.0 + noise_var);
        return Ok(back.iter().zip(prechirp).map(|(z, c)| z * c.conj() * scale).collect());
    }
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n {
        e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        e[m] = prechirp[m];
        let col = propagate(&mm.synthesize(&e)?, &ch.paths);
        for (i, z) in col.into_iter().enumerate() {
            g[(i, m)] = z;
        }
    }
    let gh = g.adjoint();
    let mut a = &gh * &g;
    for i in 0..n {
        a[(i, i)] += Complex64::new(noise_var, 0.0);
    }
    let rhs = &gh * DVector::from_column_slice(y);
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a.lu().solve(&rhs).ok_or(AfdmError::Singular)?,
    };
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(AfdmError::Singular);
    }
    Ok(x.iter().cloned().collect())
}

/// Estimates restricted to data subcarriers, hard-decided to symbol indices.
pub fn mmse_receive(
    cfg: &AfdmConfig,
    mm: &ModulationMatrices,
    y: &[Complex64],
    ch: &ChannelRealization,
    u: &[Complex64],
    noise_var: f64,
) -> Result<Vec<usize>> {
    let est = mmse_estimate(mm, y, ch, &known_prechirp(cfg, u), noise_var)?;
    Ok(cfg.partition.data().iter().map(|&m| cfg.constellation.decide(est[m])).collect())
}
