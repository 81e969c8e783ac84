//! Brute-force reference implementations shared by the integration tests.
//! Each one evaluates the defining scalar sum directly and never touches the
//! library's fast paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use afdm::{AfdmConfig, LazSpec, SubcarrierPartition};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cis(phase_cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * phase_cycles)
}

pub fn gauss_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Random vector scaled to the given energy.
pub fn random_with_energy<R: Rng>(rng: &mut R, n: usize, energy: f64) -> Vec<Complex64> {
    let v = gauss_vec(rng, n);
    let e: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let s = (energy / e).sqrt();
    v.into_iter().map(|z| z * s).collect()
}

pub fn random_psk<R: Rng>(rng: &mut R, n: usize, order: usize) -> Vec<Complex64> {
    (0..n).map(|_| cis(rng.random_range(0..order) as f64 / order as f64)).collect()
}

pub fn no_reserved(n: usize, c1: f64) -> AfdmConfig {
    AfdmConfig::new(n, c1, SubcarrierPartition::new(n, &[]).unwrap()).unwrap()
}

pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// s[n] = N^-1/2 sum_m v[m] exp(j 2 pi (c1 n^2 + n m / N)), with v = x .* exp(j 2 pi c2 m^2).
pub fn symbol_rate_sum(n: usize, c1: f64, v: &[Complex64]) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, vm) in v.iter().enumerate() {
                acc += vm * cis(c1 * (i * i) as f64 + (i * m) as f64 / n as f64);
            }
            acc / (n as f64).sqrt()
        })
        .collect()
}

/// Wrapping index from its defining inequality: the largest q <= C with
/// c1' t^2 + (m / T) t >= q / dt.
pub fn wrap_count(cfg: &AfdmConfig, m: usize, t: f64) -> usize {
    let lhs = cfg.c1_prime() * t * t + m as f64 / cfg.period * t;
    let q = (lhs * cfg.dt()).floor().max(0.0) as usize;
    q.min(cfg.wraps())
}

/// Oversampled samples from the scalar chirp-basis definition.
pub fn oversampled_sum(cfg: &AfdmConfig, v: &[Complex64]) -> Vec<Complex64> {
    let n = cfg.n;
    let lp = cfg.oversampling;
    let rows = n * lp;
    let ts = cfg.period / rows as f64;
    (0..rows)
        .map(|r| {
            let t = r as f64 * ts;
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, vm) in v.iter().enumerate() {
                let q = wrap_count(cfg, m, t) as f64;
                let ph = cfg.c1_prime() * t * t + m as f64 / cfg.period * t - q / cfg.dt() * t;
                acc += vm * cis(ph);
            }
            acc / (rows as f64).sqrt()
        })
        .collect()
}

/// A = sum_{i,j} conj(s_i) [J_tau D(mu)]_{ij} s_j with the matrices spelled out.
pub fn ambiguity_double_sum(s: &[Complex64], tau: i64, mu: f64) -> Complex64 {
    let n = s.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let jt = if (i as i64 - j as i64 - tau).rem_euclid(n as i64) == 0 { 1.0 } else { 0.0 };
            if jt == 0.0 {
                continue;
            }
            let d = cis(-mu * j as f64 / n as f64);
            acc += s[i].conj() * d * s[j];
        }
    }
    acc
}

/// Weighted ISL from explicit shifts over the zone, origin excluded.
pub fn isl_brute(s: &[Complex64], laz: &LazSpec) -> f64 {
    let t = laz.tau_max as i64;
    let mut idx = 0;
    let mut total = 0.0;
    for tau in -t..=t {
        for q in 0..laz.l_mu {
            let mu = laz.mu(q);
            if tau == 0 && mu.abs() < 1e-12 {
                continue;
            }
            total += laz.weights()[idx] * ambiguity_double_sum(s, tau, mu).norm_sqr();
            idx += 1;
        }
    }
    total
}

/// max |s|^2 / mean |s|^2.
pub fn papr_linear(s: &[Complex64]) -> f64 {
    let peak = s.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    peak / (energy(s) / s.len() as f64)
}

/// Dense N x N matrix helpers, row-major.
pub fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn adjoint(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}
