//! Experiment configuration and the command drivers behind the CLI.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{conventional_afdm, gps_sweep};
use crate::config::{AfdmConfig, PrechirpAlphabet, Psk, SubcarrierPartition, DEFAULT_DELTA};
use crate::error::{AfdmError, Result};
use crate::io::{csv, sha256_hex, write_atomic, DesignMetadata, Manifest, Waveform};
use crate::metrics::{ccdf, papr_of_samples, AfGrid, LazSpec};
use crate::optimizer::{run_jipd_mm, DesignResult, OptimizerOptions};
use crate::signal::{DesignVector, ModulationMatrices};
use crate::sim::montecarlo::{
    cfar_false_alarm_rate, parallel_map, run_ber_mc, run_detection_mc, run_roc, BerScenario, BerSource,
    DetectionScenario,
};

/// Static system block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    /// Defaults to 21 / 2N.
    pub c1: Option<f64>,
    pub oversampling: usize,
    pub period: f64,
    pub alphabet_size: usize,
    pub phi0: f64,
    pub delta: f64,
    pub rcs_ratio: f64,
    /// Explicit reserved indices; overrides `rcs_ratio`.
    pub reserved: Option<Vec<usize>>,
    pub constellation_bits: u32,
    /// Recorded only; all computation is in normalized units.
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n: 128,
            c1: None,
            oversampling: 4,
            period: 1.0,
            alphabet_size: 8,
            phi0: 0.0,
            delta: DEFAULT_DELTA,
            rcs_ratio: 0.2,
            reserved: None,
            constellation_bits: 3,
            carrier_hz: 28e9,
            bandwidth_hz: 100e6,
        }
    }
}

impl SystemConfig {
    /// Configuration with the given reserved fraction (ignoring `reserved`).
    pub fn build_with_ratio(&self, ratio: f64) -> Result<AfdmConfig> {
        self.assemble(SubcarrierPartition::from_ratio(self.n, ratio)?)
    }

    pub fn build(&self) -> Result<AfdmConfig> {
        let part = match &self.reserved {
            Some(r) => SubcarrierPartition::new(self.n, r)?,
            None => SubcarrierPartition::from_ratio(self.n, self.rcs_ratio)?,
        };
        self.assemble(part)
    }

    fn assemble(&self, partition: SubcarrierPartition) -> Result<AfdmConfig> {
        let cfg = AfdmConfig {
            n: self.n,
            c1: self.c1.unwrap_or(21.0 / (2.0 * self.n as f64)),
            oversampling: self.oversampling,
            period: self.period,
            alphabet: PrechirpAlphabet { size: self.alphabet_size, phi0: self.phi0, delta: self.delta },
            partition,
            constellation: Psk { bits: self.constellation_bits },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LazConfig {
    pub tau_max: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub l_mu: usize,
    pub weights: Option<Vec<f64>>,
}

impl Default for LazConfig {
    fn default() -> Self {
        Self { tau_max: 8, mu_min: -4.0, mu_max: 4.0, l_mu: 9, weights: None }
    }
}

impl LazConfig {
    pub fn build(&self) -> Result<LazSpec> {
        let laz = LazSpec::new(self.tau_max, self.mu_min, self.mu_max, self.l_mu)?;
        match &self.weights {
            Some(w) => laz.with_weights(w.clone()),
            None => Ok(laz),
        }
    }
}

/// Where transmitted waveforms come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Conventional,
    Gps,
    Proposed,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Conventional => "conventional",
            Source::Gps => "gps",
            Source::Proposed => "proposed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub seeds: usize,
    /// Run a baseline instead of the optimizer.
    pub baseline: Option<Source>,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self { seeds: 1, baseline: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcdfConfig {
    pub source: Source,
    pub trials: usize,
    pub thresholds_db: Vec<f64>,
}

impl Default for CcdfConfig {
    fn default() -> Self {
        Self { source: Source::Conventional, trials: 1000, thresholds_db: (0..=48).map(|k| k as f64 * 0.25).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SenseConfig {
    pub sources: Vec<Source>,
    /// Designs per source; trials cycle through them.
    pub pool: usize,
    pub scenario: DetectionScenario,
    pub roc_snr_db: f64,
    pub roc_pfa: Vec<f64>,
    pub calibration_maps: usize,
}

impl Default for SenseConfig {
    fn default() -> Self {
        Self {
            sources: vec![Source::Conventional, Source::Proposed],
            pool: 20,
            scenario: DetectionScenario::default(),
            roc_snr_db: -4.0,
            roc_pfa: vec![1e-4, 1e-3, 1e-2, 1e-1],
            calibration_maps: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerConfig {
    pub sources: Vec<Source>,
    pub pool: usize,
    pub scenario: BerScenario,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self { sources: vec![Source::Conventional, Source::Gps, Source::Proposed], pool: 20, scenario: BerScenario::default() }
    }
}

/// Whole experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub system: SystemConfig,
    pub laz: LazConfig,
    pub optimizer: OptimizerOptions,
    pub design: DesignConfig,
    pub ccdf: CcdfConfig,
    pub sense: SenseConfig,
    pub ber: BerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            threads: 1,
            system: SystemConfig::default(),
            laz: LazConfig::default(),
            optimizer: OptimizerOptions::default(),
            design: DesignConfig::default(),
            ccdf: CcdfConfig::default(),
            sense: SenseConfig::default(),
            ber: BerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AfdmError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system.build()?;
        self.laz.build()?;
        self.optimizer.validate()
    }
}

/// Data realization for seed `s`, shared by every source so comparisons are paired.
pub fn make_design(rc: &RunConfig, source: Source, seed: u64) -> Result<(AfdmConfig, DesignVector, Option<DesignResult>)> {
    match source {
        Source::Conventional => {
            let cfg = rc.system.build_with_ratio(0.0)?;
            let d = conventional_afdm(&cfg, seed);
            Ok((cfg, d, None))
        }
        Source::Gps => {
            let cfg = rc.system.build_with_ratio(0.0)?;
            let mm = ModulationMatrices::new(&cfg)?;
            let d = gps_sweep(&cfg, &mm, &conventional_afdm(&cfg, seed))?;
            Ok((cfg, d, None))
        }
        Source::Proposed => {
            let cfg = rc.system.build()?;
            let laz = rc.laz.build()?;
            let res = run_jipd_mm(&cfg, &laz, &conventional_afdm(&cfg, seed), &rc.optimizer)?;
            Ok((cfg, res.design.clone(), Some(res)))
        }
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn write_manifest(rc: &RunConfig, command: &str, files: Vec<String>) -> Result<()> {
    let m = Manifest {
        command: command.into(),
        config_sha256: sha256_hex(rc.to_toml().as_bytes()),
        seed: rc.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        files,
    };
    let text = serde_json::to_string_pretty(&m).map_err(|e| AfdmError::Format(e.to_string()))?;
    write_atomic(&rc.out.join("manifest.json"), text.as_bytes())
}

/// Outcome of a multi-item command: item failures are recorded, not fatal.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub written: Vec<String>,
    pub failures: Vec<String>,
}

/// Design one waveform per seed; writes waveform, trace, metadata and a summary.
pub fn cmd_design(rc: &RunConfig) -> Result<RunReport> {
    rc.validate()?;
    let source = rc.design.baseline.unwrap_or(Source::Proposed);
    let laz = rc.laz.build()?;
    let seeds: Vec<u64> = (0..rc.design.seeds as u64).map(|k| rc.seed + k).collect();
    let results = parallel_map(seeds.len(), rc.threads, |i| make_design(rc, source, seeds[i]));
    let mut report = RunReport::default();
    let mut rows = Vec::new();
    for (seed, res) in seeds.iter().zip(results) {
        let (cfg, design, opt) = match res {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let mm = ModulationMatrices::new(&cfg)?;
        let wave = Waveform::from_design(&cfg, &mm, &design)?;
        let s = wave.symbol_rate();
        let isl = AfGrid::compute(&s, &laz).weighted_isl();
        let papr_db = papr_of_samples(&wave.samples)?.db;
        let base_cfg = rc.system.build_with_ratio(0.0)?;
        let base = conventional_afdm(&base_cfg, *seed);
        let base_isl = AfGrid::compute(&ModulationMatrices::new(&base_cfg)?.synthesize(&base.effective(&base_cfg))?, &laz).weighted_isl();
        let stem = format!("design_{seed}");
        write_atomic(&rc.out.join(format!("{stem}.afdm")), &wave.to_bytes())?;
        report.written.push(format!("{stem}.afdm"));
        if let Some(r) = &opt {
            write_atomic(&rc.out.join(format!("{stem}.trace.csv")), r.trace_csv().as_bytes())?;
            report.written.push(format!("{stem}.trace.csv"));
        }
        let meta = DesignMetadata {
            source: source.name().into(),
            mode: opt.as_ref().map(|_| format!("{:?}", rc.optimizer.mode)),
            variables: opt.as_ref().map(|_| format!("{:?}", rc.optimizer.variables)),
            seed: *seed,
            gamma_db: opt.as_ref().map(|_| rc.optimizer.gamma_db),
            rcs_ratio: cfg.partition.ratio(),
            prechirp: design.prechirp.clone(),
            symbols: design.symbols.clone(),
            isl,
            papr_db,
            created_unix: now_unix(),
        };
        let text = serde_json::to_string_pretty(&meta).map_err(|e| AfdmError::Format(e.to_string()))?;
        write_atomic(&rc.out.join(format!("{stem}.json")), text.as_bytes())?;
        report.written.push(format!("{stem}.json"));
        rows.push(vec![
            seed.to_string(),
            fmt(isl),
            fmt(10.0 * (isl / base_isl).log10()),
            fmt(papr_db),
            opt.as_ref().map(|r| r.iterations).unwrap_or(0).to_string(),
            opt.as_ref().map(|r| r.converged).unwrap_or(true).to_string(),
            opt.as_ref().map(|r| r.feasible).unwrap_or(true).to_string(),
        ]);
    }
    let summary = csv("instance,isl_raw,isl_db_vs_baseline,papr_db,iterations,converged,feasible", rows);
    write_atomic(&rc.out.join("summary.csv"), summary.as_bytes())?;
    report.written.push("summary.csv".into());
    write_manifest(rc, "design", report.written.clone())?;
    Ok(report)
}

/// Recompute metrics from stored waveform files.
pub fn cmd_evaluate(rc: &RunConfig, files: &[PathBuf]) -> Result<RunReport> {
    let laz = rc.laz.build()?;
    let mut report = RunReport::default();
    let mut rows = Vec::new();
    for path in files {
        match evaluate_file(rc, &laz, path) {
            Ok((name, isl, papr_db)) => {
                report.written.push(name);
                rows.push(vec![path.display().to_string(), fmt(isl), fmt(papr_db)]);
            }
            Err(e) => report.failures.push(format!("{}: {e}", path.display())),
        }
    }
    write_atomic(&rc.out.join("evaluate.csv"), csv("file,isl,papr_db", rows).as_bytes())?;
    report.written.push("evaluate.csv".into());
    write_manifest(rc, "evaluate", report.written.clone())?;
    Ok(report)
}

fn evaluate_file(rc: &RunConfig, laz: &LazSpec, path: &Path) -> Result<(String, f64, f64)> {
    let wave = Waveform::read(path)?;
    let grid = AfGrid::compute(&wave.symbol_rate(), laz);
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "wave".into());
    let name = format!("af_{stem}.csv");
    write_atomic(&rc.out.join(&name), grid.to_csv().as_bytes())?;
    Ok((name, grid.weighted_isl(), papr_of_samples(&wave.samples)?.db))
}

/// Empirical PAPR CCDF of one source.
pub fn cmd_ccdf(rc: &RunConfig) -> Result<RunReport> {
    rc.validate()?;
    let c = &rc.ccdf;
    let samples = parallel_map(c.trials, rc.threads, |t| -> Result<f64> {
        let (cfg, d, _) = make_design(rc, c.source, rc.seed + t as u64)?;
        let mm = ModulationMatrices::new(&cfg)?;
        Ok(papr_of_samples(&mm.synthesize_oversampled(&d.effective(&cfg))?)?.db)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    let curve = ccdf(&samples, &c.thresholds_db)?;
    let name = format!("ccdf_{}.csv", c.source.name());
    let rows = c.thresholds_db.iter().zip(&curve).map(|(g, p)| vec![fmt(*g), fmt(*p)]);
    write_atomic(&rc.out.join(&name), csv("gamma_db,ccdf", rows).as_bytes())?;
    let report = RunReport { written: vec![name], failures: vec![] };
    write_manifest(rc, "ccdf", report.written.clone())?;
    Ok(report)
}

fn symbol_pool(rc: &RunConfig, source: Source, count: usize) -> Result<Vec<Vec<Complex64>>> {
    parallel_map(count, rc.threads, |k| -> Result<Vec<Complex64>> {
        let (cfg, d, _) = make_design(rc, source, rc.seed + k as u64)?;
        ModulationMatrices::new(&cfg)?.synthesize(&d.effective(&cfg))
    })
    .into_iter()
    .collect()
}

/// Weak-target detection rate, ROC and detector calibration per source.
pub fn cmd_sense(rc: &RunConfig) -> Result<RunReport> {
    rc.validate()?;
    let sc = &rc.sense;
    let mut report = RunReport::default();
    for &src in &sc.sources {
        let pool = match symbol_pool(rc, src, sc.pool) {
            Ok(p) => p,
            Err(e) => {
                report.failures.push(format!("{}: {e}", src.name()));
                continue;
            }
        };
        let pd = run_detection_mc(&sc.scenario, &pool, rc.threads)?;
        let rows = pd.iter().map(|p| vec![fmt(p.snr_db), fmt(p.pd), fmt(p.ci_lo), fmt(p.ci_hi)]);
        let name = format!("pd_{}.csv", src.name());
        write_atomic(&rc.out.join(&name), csv("snr_db,pd,ci_lo,ci_hi", rows).as_bytes())?;
        report.written.push(name);
        let roc = run_roc(&sc.scenario, &pool, sc.roc_snr_db, &sc.roc_pfa, rc.threads)?;
        let name = format!("roc_{}.csv", src.name());
        write_atomic(&rc.out.join(&name), csv("pfa,pd", roc.iter().map(|(a, b)| vec![fmt(*a), fmt(*b)])).as_bytes())?;
        report.written.push(name);
        if sc.calibration_maps > 0 {
            let emp = cfar_false_alarm_rate(&sc.scenario, &pool, &sc.scenario.cfar, sc.calibration_maps, rc.threads)?;
            let name = format!("cfar_{}.csv", src.name());
            let row = vec![fmt(sc.scenario.cfar.pfa), fmt(emp)];
            write_atomic(&rc.out.join(&name), csv("nominal_pfa,empirical_pfa", [row]).as_bytes())?;
            report.written.push(name);
        }
    }
    write_manifest(rc, "sense", report.written.clone())?;
    Ok(report)
}

/// BER curves per source with paired data and noise seeds.
pub fn cmd_ber(rc: &RunConfig) -> Result<RunReport> {
    rc.validate()?;
    let bc = &rc.ber;
    let mut report = RunReport::default();
    for &src in &bc.sources {
        let built = parallel_map(bc.pool, rc.threads, |k| make_design(rc, src, rc.seed + k as u64));
        let mut cfg = None;
        let mut designs = Vec::new();
        for b in built {
            match b {
                Ok((c, d, _)) => {
                    cfg.get_or_insert(c);
                    designs.push(d);
                }
                Err(e) => report.failures.push(format!("{}: {e}", src.name())),
            }
        }
        let Some(cfg) = cfg else { continue };
        let curve = run_ber_mc(&BerSource { cfg, designs }, &bc.scenario, rc.threads)?;
        let rows = curve.iter().map(|p| vec![fmt(p.snr_db), fmt(p.ber), p.bits.to_string(), p.errors.to_string()]);
        let name = format!("ber_{}.csv", src.name());
        write_atomic(&rc.out.join(&name), csv("snr_db,ber,bits,errors", rows).as_bytes())?;
        report.written.push(name);
    }
    write_manifest(rc, "ber", report.written.clone())?;
    Ok(report)
}
