mod common;

use std::f64::consts::PI;

use afdm::signal::{effective_spectral_efficiency, wrap_breakpoint, wrap_index};
use afdm::{AfdmConfig, DesignVector, ModulationMatrices, PrechirpAlphabet, SubcarrierPartition};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn alphabet_points() {
    let a = PrechirpAlphabet { size: 8, phi0: 0.0, delta: 0.0 };
    let p = a.points(1)[2];
    assert!((p - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    let pts = a.points(5);
    assert_eq!(pts.len(), 8);
    for (l, z) in pts.iter().enumerate() {
        assert!((z - Complex64::from_polar(1.0, l as f64 * PI / 4.0)).norm() < 1e-14);
    }
    assert_eq!(a.points(0), vec![Complex64::new(1.0, 0.0)]);
    // The c2 that realizes a point reproduces it through exp(j 2 pi c2 m^2).
    let m = 7;
    for l in 0..8 {
        let z = cis(a.c2(m, l) * (m * m) as f64);
        assert!((z - a.points(m)[l]).norm() < 1e-12);
    }
}

#[test]
fn synthesis_matches_scalar_sum_n4() {
    let cfg = no_reserved(4, 1.0 / 8.0);
    let mm = ModulationMatrices::new(&cfg).unwrap();
    let x = vec![Complex64::new(1.0, 0.0); 4];
    let s = mm.synthesize(&x).unwrap();
    assert!(max_abs_diff(&s, &symbol_rate_sum(4, 1.0 / 8.0, &x)) < 1e-12);
}

#[test]
fn synthesis_matches_scalar_sum_with_prechirps() {
    let mut r = rng(11);
    let cfg = no_reserved(16, 3.0 / 32.0);
    let mm = ModulationMatrices::new(&cfg).unwrap();
    for _ in 0..10 {
        let x = random_psk(&mut r, 16, 8);
        let c2: Vec<f64> = (0..16).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
        let v: Vec<Complex64> = (0..16).map(|m| x[m] * cis(c2[m] * (m * m) as f64)).collect();
        let s = mm.synthesize(&v).unwrap();
        assert!(max_abs_diff(&s, &symbol_rate_sum(16, cfg.c1, &v)) < 1e-11);
    }
}

#[test]
fn single_subcarrier_is_constant_modulus_chirp() {
    let cfg = no_reserved(8, 1.0 / 16.0);
    let mm = ModulationMatrices::new(&cfg).unwrap();
    let mut u = vec![Complex64::new(0.0, 0.0); 8];
    u[0] = Complex64::new(8f64.sqrt(), 0.0);
    let s = mm.synthesize(&u).unwrap();
    for (i, z) in s.iter().enumerate() {
        assert!((z - cis(cfg.c1 * (i * i) as f64)).norm() < 1e-12);
    }
    let sp = mm.synthesize_oversampled(&u).unwrap();
    let expect = 8f64.sqrt() / (32f64).sqrt();
    assert!(sp.iter().all(|z| (z.norm() - expect).abs() < 1e-12));
}

#[test]
fn wrap_index_breakpoint_example() {
    let mut cfg = no_reserved(8, 1.0 / 16.0);
    cfg.period = 8.0;
    assert!((cfg.dt() - 1.0).abs() < 1e-15);
    assert!((wrap_breakpoint(&cfg, 0, 1) - 4.0).abs() < 1e-12);
    assert_eq!(wrap_index(&cfg, 0, 3.9).unwrap(), 0);
    assert_eq!(wrap_index(&cfg, 0, 4.0).unwrap(), 1);
    assert_eq!(wrap_index(&cfg, 5, 0.0).unwrap(), 0);
    assert!(wrap_index(&cfg, 0, 8.0).is_err());
    assert!(wrap_index(&cfg, 0, -0.1).is_err());
}

#[test]
fn no_wrapping_without_chirp() {
    let cfg = no_reserved(8, 0.0);
    for k in 0..80 {
        assert_eq!(wrap_index(&cfg, 7, k as f64 / 80.0).unwrap(), 0);
    }
}

#[test]
fn wrap_index_matches_defining_inequality() {
    let cfg = AfdmConfig::reference(0.0).unwrap();
    let mut r = rng(3);
    for _ in 0..2000 {
        let m = rand::Rng::random_range(&mut r, 0..cfg.n);
        let t = rand::Rng::random::<f64>(&mut r) * cfg.period;
        assert_eq!(wrap_index(&cfg, m, t).unwrap(), wrap_count(&cfg, m, t), "m={m} t={t}");
    }
}

#[test]
fn breakpoints_solve_the_wrap_equation() {
    let cfg = AfdmConfig::reference(0.0).unwrap();
    for m in [0, 1, 17, 127] {
        for q in 1..=cfg.wraps() {
            let t = wrap_breakpoint(&cfg, m, q);
            let lhs = cfg.c1_prime() * t * t + m as f64 / cfg.period * t;
            assert!((lhs - q as f64 / cfg.dt()).abs() < 1e-9 * (q as f64 / cfg.dt()));
        }
    }
}

#[test]
fn oversampled_matches_scalar_basis() {
    let mut r = rng(5);
    for (n, c1) in [(8, 1.0 / 16.0), (8, 3.0 / 16.0), (16, 5.0 / 32.0)] {
        let cfg = no_reserved(n, c1);
        let mm = ModulationMatrices::new(&cfg).unwrap();
        for _ in 0..5 {
            let u = random_with_energy(&mut r, n, n as f64);
            let got = mm.synthesize_oversampled(&u).unwrap();
            assert!(max_abs_diff(&got, &oversampled_sum(&cfg, &u)) < 1e-11);
        }
    }
}

#[test]
fn spectral_efficiency_examples() {
    let cfg = AfdmConfig::new(128, 21.0 / 256.0, SubcarrierPartition::comb(128, 26).unwrap()).unwrap();
    assert_eq!(cfg.partition.data().len(), 102);
    let se = effective_spectral_efficiency(&cfg, 3, true);
    assert!((se - 102.0 / 230.0).abs() < 1e-15);
    assert!((se - 0.4435).abs() < 1e-4);
    let cfg = cfg.with_partition(SubcarrierPartition::comb(128, 77).unwrap()).unwrap();
    assert_eq!(cfg.partition.data().len(), 51);
    let se = effective_spectral_efficiency(&cfg, 3, false);
    assert!((se - 51.0 / 128.0).abs() < 1e-15);
    let all = cfg.with_partition(SubcarrierPartition::comb(128, 128).unwrap()).unwrap();
    assert_eq!(effective_spectral_efficiency(&all, 3, true), 0.0);
}

#[test]
fn partition_rejects_bad_indices() {
    assert!(SubcarrierPartition::new(8, &[8]).is_err());
    assert!(SubcarrierPartition::new(8, &[1, 1]).is_err());
    assert!(SubcarrierPartition::from_ratio(8, 1.2).is_err());
    let p = SubcarrierPartition::comb(128, 26).unwrap();
    assert_eq!(p.reserved().len(), 26);
    assert!(p.reserved().windows(2).all(|w| w[1] - w[0] >= 4));
}

#[test]
fn config_validation() {
    assert!(AfdmConfig::new(7, 0.0, SubcarrierPartition::new(7, &[]).unwrap()).is_err());
    assert!(AfdmConfig::new(8, 0.01, SubcarrierPartition::new(8, &[]).unwrap()).is_err());
    assert!(AfdmConfig::new(8, 1.0 / 16.0, SubcarrierPartition::new(4, &[]).unwrap()).is_err());
    let cfg = AfdmConfig::reference(0.2).unwrap();
    assert_eq!(cfg.wraps(), 21);
}

#[test]
fn dimension_mismatch_is_reported() {
    let cfg = no_reserved(8, 1.0 / 16.0);
    let mm = ModulationMatrices::new(&cfg).unwrap();
    assert!(mm.synthesize(&[Complex64::new(1.0, 0.0); 4]).is_err());
    assert!(mm.synthesize_oversampled(&[Complex64::new(1.0, 0.0); 9]).is_err());
}

#[test]
fn data_symbols_enter_through_b() {
    let cfg = AfdmConfig::reference(0.25).unwrap();
    let d = afdm::baselines::conventional_afdm(&cfg, 4);
    let b = d.b(&cfg);
    for &m in cfg.partition.reserved() {
        assert_eq!(b[m], Complex64::new(1.0, 0.0));
    }
    let v = d.effective(&cfg);
    assert!((energy(&v) - 128.0).abs() < 1e-9);
    let round = DesignVector { u: d.u.clone(), symbols: d.symbols.clone(), prechirp: d.prechirp.clone() };
    assert_eq!(round, d);
}

fn unitary_error(n: usize, c1: f64, b: &[Complex64]) -> f64 {
    let cfg = no_reserved(n, c1);
    let mm = ModulationMatrices::new(&cfg).unwrap();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for m in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[m] = b[m];
        for (i, z) in mm.synthesize(&e).unwrap().into_iter().enumerate() {
            a[i * n + m] = z;
        }
    }
    let g = matmul(&adjoint(&a, n), &a, n);
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            f += (g[i * n + j] - id).norm_sqr();
        }
    }
    f.sqrt()
}

#[test]
fn unitarity_for_several_sizes() {
    let mut r = rng(8);
    for n in [8, 16, 64, 128] {
        let b = random_psk(&mut r, n, 8);
        let e = unitary_error(n, 1.0 / (2.0 * n as f64), &b);
        assert!(e < 1e-10, "N={n}: {e}");
    }
}

#[test]
fn dense_basis_matches_fft_path() {
    let cfg = AfdmConfig::reference(0.0).unwrap();
    let mm = ModulationMatrices::new(&cfg).unwrap();
    let phi = mm.phi_dense();
    let mut r = rng(1);
    let u = random_with_energy(&mut r, 128, 128.0);
    let dense: Vec<Complex64> =
        (0..128).map(|i| (0..128).map(|m| phi[i * 128 + m] * u[m]).sum()).collect();
    assert!(max_abs_diff(&dense, &mm.synthesize(&u).unwrap()) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_and_round_trip(seed in any::<u64>(), k in 0usize..3) {
        let n = [8, 16, 64][k];
        let cfg = no_reserved(n, 1.0 / (2.0 * n as f64));
        let mm = ModulationMatrices::new(&cfg).unwrap();
        let mut r = rng(seed);
        let u = random_with_energy(&mut r, n, n as f64);
        let s = mm.synthesize(&u).unwrap();
        prop_assert!((energy(&s) - n as f64).abs() < 1e-10 * n as f64);
        let back = mm.analyze(&s).unwrap();
        prop_assert!(max_abs_diff(&back, &u) < 1e-10);
    }

    #[test]
    fn decimation_identity(seed in any::<u64>(), k in 0usize..3, lp in 1usize..6) {
        let n = [8, 16, 64][k];
        let mut cfg = no_reserved(n, 3.0 / (2.0 * n as f64));
        cfg.oversampling = lp;
        let mm = ModulationMatrices::new(&cfg).unwrap();
        let mut r = rng(seed);
        let u = random_with_energy(&mut r, n, 1.0);
        let s = mm.synthesize(&u).unwrap();
        let sp = mm.synthesize_oversampled(&u).unwrap();
        for i in 0..n {
            prop_assert!((sp[lp * i] * (lp as f64).sqrt() - s[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn wrap_index_is_monotone(m in 0usize..128, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let cfg = AfdmConfig::reference(0.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let qa = wrap_index(&cfg, m, lo).unwrap();
        let qb = wrap_index(&cfg, m, hi).unwrap();
        prop_assert!(qa <= qb);
        prop_assert!(qb <= cfg.wraps());
    }
}
