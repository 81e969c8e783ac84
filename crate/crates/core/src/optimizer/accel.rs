//! Squared extrapolation around a monotone fixed-point map.

use num_complex::Complex64;

use crate::error::Result;

/// Outcome of one extrapolation cycle.
#[derive(Clone, Debug)]
pub struct SquaremStep {
    pub u: Vec<Complex64>,
    pub merit: f64,
    /// Number of base-map evaluations spent.
    pub evals: usize,
}

/// One safeguarded cycle: two base steps, an extrapolated point pulled back
/// toward the plain double step until the merit no longer increases.
pub fn squarem_step<F, M, P>(u: &[Complex64], merit_u: f64, map: &mut F, merit: &M, project: &P) -> Result<SquaremStep>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    M: Fn(&[Complex64]) -> Result<f64>,
    P: Fn(&mut [Complex64]),
{
    let u1 = map(u)?;
    let u2 = map(&u1)?;
    let mut evals = 2;
    let r: Vec<Complex64> = u1.iter().zip(u).map(|(a, b)| a - b).collect();
    let v: Vec<Complex64> = u2.iter().zip(&u1).zip(&r).map(|((a, b), c)| a - b - c).collect();
    let nr = norm(&r);
    let nv = norm(&v);
    let mut step = if nv > 0.0 { (-nr / nv).min(-1.0) } else { -1.0 };
    loop {
        let mut x: Vec<Complex64> =
            u.iter().zip(&r).zip(&v).map(|((a, b), c)| a - b * (2.0 * step) + c * (step * step)).collect();
        project(&mut x);
        let cand = map(&x)?;
        evals += 1;
        let f = merit(&cand)?;
        if f <= merit_u || step == -1.0 {
            if f <= merit_u {
                return Ok(SquaremStep { u: cand, merit: f, evals });
            }
            break;
        }
        step = (step - 1.0) / 2.0;
        if step > -1.01 {
            step = -1.0;
        }
    }
    let f = merit(&u2)?;
    Ok(SquaremStep { u: u2, merit: f, evals })
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
