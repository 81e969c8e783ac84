//! Deterministic Monte Carlo drivers for detection and BER.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{add_noise, propagate, ChannelRealization, Path};
use super::pa::{apply_ibo, mean_power};
use super::receiver::mmse_receive;
use super::sensing::{ca_cfar, range_doppler_map, CfarConfig};
use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};
use crate::signal::{DesignVector, ModulationMatrices};

/// Per-trial seed; independent of how trials are distributed over workers.
/// SplitMix64 finalizer over base + golden-ratio stride.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut z = base.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Map `f` over 0..count on up to `threads` scoped workers, preserving order.
pub fn parallel_map<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(count.max(1));
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                scope.spawn(move || {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(count);
                    (lo..hi).map(f).collect::<Vec<T>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Two-target sensing experiment on a cyclic delay-Doppler grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionScenario {
    pub strong: (i64, f64),
    pub weak: (i64, f64),
    /// Strong-target power above the weak one, in dB.
    pub gap_db: f64,
    /// Weak-target echo SNR per sample, in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub taus: Vec<i64>,
    pub mus: Vec<f64>,
    pub cfar: CfarConfig,
    pub seed: u64,
}

impl Default for DetectionScenario {
    fn default() -> Self {
        Self {
            strong: (8, 0.0),
            weak: (12, 2.0),
            gap_db: 10.0,
            snr_db: vec![-12.0, -8.0, -4.0, 0.0, 4.0, 8.0],
            trials: 2000,
            taus: (0..32).collect(),
            mus: (-16..16).map(f64::from).collect(),
            cfar: CfarConfig::default(),
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdPoint {
    pub snr_db: f64,
    pub pd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub detections: usize,
    pub trials: usize,
}

fn echo<R: Rng>(rng: &mut R, s: &[Complex64], scn: &DetectionScenario, snr_db: f64) -> Vec<Complex64> {
    let weak = 10f64.powf(snr_db / 20.0);
    let strong = weak * 10f64.powf(scn.gap_db / 20.0);
    let phase = |rng: &mut R| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let paths = [
        Path { gain: phase(rng) * strong, delay: scn.strong.0 as usize, doppler: scn.strong.1 },
        Path { gain: phase(rng) * weak, delay: scn.weak.0 as usize, doppler: scn.weak.1 },
    ];
    let mut y = propagate(s, &paths);
    add_noise(rng, &mut y, 1.0);
    y
}

fn check_pool(pool: &[Vec<Complex64>]) -> Result<()> {
    if pool.is_empty() {
        return Err(AfdmError::Empty);
    }
    Ok(())
}

/// Weak-target detection rate per SNR. Trial t uses waveform `pool[t % len]`
/// and the same random draws at every SNR point.
pub fn run_detection_mc(scn: &DetectionScenario, pool: &[Vec<Complex64>], threads: usize) -> Result<Vec<PdPoint>> {
    check_pool(pool)?;
    if scn.strong.0 < 0 || scn.weak.0 < 0 {
        return Err(AfdmError::Config("target delays must be non-negative".into()));
    }
    let mut out = Vec::new();
    for &snr in &scn.snr_db {
        let hits = parallel_map(scn.trials, threads, |t| -> Result<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scn.seed, t as u64));
            let s = &pool[t % pool.len()];
            let y = echo(&mut rng, s, scn, snr);
            let map = range_doppler_map(s, &y, &scn.taus, &scn.mus);
            let det = ca_cfar(&map, &scn.cfar)?;
            let (i, j) = map
                .index_of(scn.weak.0, scn.weak.1)
                .ok_or_else(|| AfdmError::Config("weak target lies off the map grid".into()))?;
            Ok(det[i * map.cols() + j])
        });
        let mut k = 0;
        for h in hits {
            k += usize::from(h?);
        }
        let (lo, hi) = wilson_interval(k, scn.trials);
        out.push(PdPoint { snr_db: snr, pd: k as f64 / scn.trials as f64, ci_lo: lo, ci_hi: hi, detections: k, trials: scn.trials });
    }
    Ok(out)
}

/// Weak-target detection rate at one SNR for each nominal false-alarm rate.
pub fn run_roc(
    scn: &DetectionScenario,
    pool: &[Vec<Complex64>],
    snr_db: f64,
    pfas: &[f64],
    threads: usize,
) -> Result<Vec<(f64, f64)>> {
    check_pool(pool)?;
    let per_trial = parallel_map(scn.trials, threads, |t| -> Result<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scn.seed, t as u64));
        let s = &pool[t % pool.len()];
        let y = echo(&mut rng, s, scn, snr_db);
        let map = range_doppler_map(s, &y, &scn.taus, &scn.mus);
        let (i, j) = map.index_of(scn.weak.0, scn.weak.1).ok_or(AfdmError::Empty)?;
        pfas.iter()
            .map(|&pfa| Ok(ca_cfar(&map, &scn.cfar.with_pfa(pfa))?[i * map.cols() + j]))
            .collect()
    });
    let mut counts = vec![0usize; pfas.len()];
    for row in per_trial {
        for (c, hit) in counts.iter_mut().zip(row?) {
            *c += usize::from(hit);
        }
    }
    Ok(pfas.iter().zip(counts).map(|(&p, c)| (p, c as f64 / scn.trials as f64)).collect())
}

/// Empirical false-alarm rate of the detector over noise-only maps.
pub fn cfar_false_alarm_rate(
    scn: &DetectionScenario,
    pool: &[Vec<Complex64>],
    cfar: &CfarConfig,
    maps: usize,
    threads: usize,
) -> Result<f64> {
    check_pool(pool)?;
    let counts = parallel_map(maps, threads, |t| -> Result<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scn.seed ^ 0x5eed_0000_0000, t as u64));
        let s = &pool[t % pool.len()];
        let mut y = vec![Complex64::new(0.0, 0.0); s.len()];
        add_noise(&mut rng, &mut y, 1.0);
        let map = range_doppler_map(s, &y, &scn.taus, &scn.mus);
        let det = ca_cfar(&map, cfar)?;
        Ok((det.iter().filter(|&&d| d).count(), det.len()))
    });
    let (mut hits, mut cells) = (0, 0);
    for c in counts {
        let (h, n) = c?;
        hits += h;
        cells += n;
    }
    Ok(hits as f64 / cells as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelKind {
    Awgn,
    DoublySelective {
        profile_db: Vec<f64>,
        cp: usize,
        doppler_max: f64,
        /// Draw one representative channel for every trial instead of one per trial.
        fixed: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerScenario {
    pub snr_db: Vec<f64>,
    pub min_bits: usize,
    pub max_trials: usize,
    /// None means an ideal linear amplifier.
    pub ibo_db: Option<f64>,
    pub rapp_p: f64,
    pub channel: ChannelKind,
    pub seed: u64,
}

impl Default for BerScenario {
    fn default() -> Self {
        Self {
            snr_db: (0..=8).map(|k| 4.0 + 2.0 * k as f64).collect(),
            min_bits: 100_000,
            max_trials: 100_000,
            ibo_db: Some(0.0),
            rapp_p: 2.0,
            channel: ChannelKind::Awgn,
            seed: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits: usize,
    pub errors: usize,
}

impl BerPoint {
    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.bits)
    }
}

/// A configuration with a pool of designed symbols to transmit.
#[derive(Clone, Debug)]
pub struct BerSource {
    pub cfg: AfdmConfig,
    pub designs: Vec<DesignVector>,
}

/// Transmit samples after the amplifier: PA on the oversampled waveform,
/// decimation to the symbol rate, unit mean power.
pub fn transmit(mm: &ModulationMatrices, v: &[Complex64], ibo_db: Option<f64>, p: f64) -> Result<Vec<Complex64>> {
    let sp = mm.synthesize_oversampled(v)?;
    let sp = match ibo_db {
        Some(ibo) => apply_ibo(&sp, ibo, p)?.0,
        None => sp,
    };
    let lp = mm.oversampling();
    let scale = (lp as f64).sqrt();
    let mut s: Vec<Complex64> = sp.iter().step_by(lp).map(|z| z * scale).collect();
    let pw = mean_power(&s);
    if !(pw > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    let g = 1.0 / pw.sqrt();
    s.iter_mut().for_each(|z| *z *= g);
    Ok(s)
}

fn normalized_profile(profile_db: &[f64]) -> Vec<f64> {
    let lin: Vec<f64> = profile_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let total: f64 = lin.iter().sum();
    lin.iter().map(|p| 10.0 * (p / total).log10()).collect()
}

/// BER per Es/N0 point with paired trial seeds.
pub fn run_ber_mc(src: &BerSource, scn: &BerScenario, threads: usize) -> Result<Vec<BerPoint>> {
    if src.designs.is_empty() {
        return Err(AfdmError::Empty);
    }
    let cfg = &src.cfg;
    let mm = ModulationMatrices::new(cfg)?;
    let bits_per = cfg.partition.data().len() * cfg.constellation.bits as usize;
    if bits_per == 0 {
        return Err(AfdmError::Config("no data subcarriers".into()));
    }
    let trials = scn.min_bits.div_ceil(bits_per).min(scn.max_trials).max(1);
    let tx: Vec<Vec<Complex64>> = src
        .designs
        .iter()
        .map(|d| transmit(&mm, &d.effective(cfg), scn.ibo_db, scn.rapp_p))
        .collect::<Result<_>>()?;
    let fixed_channel = match &scn.channel {
        ChannelKind::DoublySelective { profile_db, cp, doppler_max, fixed: true } => {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scn.seed, u64::MAX));
            Some(ChannelRealization::random(&mut rng, &normalized_profile(profile_db), *cp, *doppler_max, 0.0))
        }
        _ => None,
    };
    let mut out = Vec::new();
    for &snr in &scn.snr_db {
        let noise_var = 10f64.powf(-snr / 10.0);
        let errs = parallel_map(trials, threads, |t| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(scn.seed, t as u64));
            let k = t % src.designs.len();
            let design = &src.designs[k];
            let mut ch = match (&scn.channel, &fixed_channel) {
                (_, Some(c)) => c.clone(),
                (ChannelKind::Awgn, None) => ChannelRealization::awgn(0.0),
                (ChannelKind::DoublySelective { profile_db, cp, doppler_max, .. }, None) => {
                    ChannelRealization::random(&mut rng, &normalized_profile(profile_db), *cp, *doppler_max, 0.0)
                }
            };
            ch.noise_var = noise_var;
            let mut y = propagate(&tx[k], &ch.paths);
            add_noise(&mut rng, &mut y, noise_var);
            let decided = mmse_receive(cfg, &mm, &y, &ch, &design.u, noise_var)?;
            let psk = cfg.constellation;
            Ok(cfg
                .partition
                .data()
                .iter()
                .zip(&decided)
                .map(|(&m, &d)| (psk.label(d) ^ psk.label(design.symbols[m])).count_ones() as usize)
                .sum())
        });
        let mut errors = 0;
        for e in errs {
            errors += e?;
        }
        let bits = trials * bits_per;
        out.push(BerPoint { snr_db: snr, ber: errors as f64 / bits as f64, bits, errors });
    }
    Ok(out)
}

/// SNR at which the BER curve crosses `target`, by log-linear interpolation.
pub fn snr_at_ber(curve: &[BerPoint], target: f64) -> Option<f64> {
    for w in curve.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber <= target && a.ber > 0.0 {
            if b.ber <= 0.0 {
                return Some(b.snr_db);
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            if la == lb {
                return Some(a.snr_db);
            }
            return Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db));
        }
    }
    None
}
