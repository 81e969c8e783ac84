//! Memoryless Rapp amplifier and input back-off.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AfdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RappPa {
    pub a_sat: f64,
    /// Smoothness of the transition into saturation.
    pub p: f64,
}

impl RappPa {
    pub fn new(a_sat: f64, p: f64) -> Result<Self> {
        if !(a_sat > 0.0) || !(p >= 1.0) {
            return Err(AfdmError::Config(format!("invalid Rapp parameters a_sat={a_sat}, p={p}")));
        }
        Ok(Self { a_sat, p })
    }

    /// AM-AM gain at input amplitude `a`.
    pub fn gain(&self, a: f64) -> f64 {
        let r = (a / self.a_sat).powf(2.0 * self.p);
        (1.0 + r).powf(-1.0 / (2.0 * self.p))
    }
}

/// Apply the AM-AM map sample by sample; phases are preserved.
pub fn rapp_amplify(samples: &[Complex64], pa: &RappPa) -> Vec<Complex64> {
    samples.iter().map(|z| z * pa.gain(z.norm())).collect()
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len().max(1) as f64
}

/// Saturation amplitude giving the requested back-off for these samples.
pub fn saturation_for_ibo(samples: &[Complex64], ibo_db: f64) -> Result<f64> {
    let p_in = mean_power(samples);
    if !(p_in > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    Ok((p_in * 10f64.powf(ibo_db / 10.0)).sqrt())
}

/// Back-off of `samples` against a saturation amplitude, in dB.
pub fn measured_ibo_db(samples: &[Complex64], a_sat: f64) -> Result<f64> {
    let p_in = mean_power(samples);
    if !(p_in > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    Ok(10.0 * (a_sat * a_sat / p_in).log10())
}

/// Set the saturation level from the back-off and amplify. Returns the PA
/// output and the saturation amplitude used.
pub fn apply_ibo(samples: &[Complex64], ibo_db: f64, p: f64) -> Result<(Vec<Complex64>, f64)> {
    let a_sat = saturation_for_ibo(samples, ibo_db)?;
    let pa = RappPa::new(a_sat, p)?;
    Ok((rapp_amplify(samples, &pa), a_sat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_at_saturation() {
        let pa = RappPa::new(1.0, 2.0).unwrap();
        assert!((pa.gain(1.0) - 2f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn ibo_four_db() {
        let s = vec![Complex64::new(1.0, 0.0); 8];
        let a = saturation_for_ibo(&s, 4.0).unwrap();
        assert!((a - 10f64.powf(0.2)).abs() < 1e-12);
    }
}
