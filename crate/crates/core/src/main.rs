use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use afdm::optimizer::{Mode, VariableSet};
use afdm::run::{cmd_ber, cmd_ccdf, cmd_design, cmd_evaluate, cmd_sense, RunConfig, RunReport, Source};
use afdm::sim::montecarlo::ChannelKind;
use afdm::AfdmError;

#[derive(Parser)]
#[command(name = "afdm", version, about = "AFDM waveform design and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize waveforms (or build a baseline) for a range of seeds.
    Design {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
        #[arg(long, value_enum)]
        vars: Option<CliVars>,
        #[arg(long)]
        rcs_ratio: Option<f64>,
        /// Target PAPR in dB.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, value_enum)]
        baseline: Option<CliBaseline>,
        /// Enable squared extrapolation for reserved-only runs.
        #[arg(long)]
        accelerate: bool,
    },
    /// Recompute ISL and PAPR from stored waveform files.
    Evaluate {
        #[command(flatten)]
        common: Common,
        files: Vec<PathBuf>,
    },
    /// PAPR CCDF of one waveform source.
    Ccdf {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        source: Option<CliSource>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Weak-target detection rate and ROC.
    Sense {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pfa: Option<f64>,
        /// SNR grid as start:step:stop in dB.
        #[arg(long)]
        snr: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Bit error rate through the amplifier and channel.
    Ber {
        #[command(flatten)]
        common: Common,
        /// Input back-off in dB; omit with --ideal-pa for a linear amplifier.
        #[arg(long)]
        ibo: Option<f64>,
        #[arg(long)]
        ideal_pa: bool,
        #[arg(long, value_enum)]
        channel: Option<CliChannel>,
        #[arg(long)]
        snr: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    AfShape,
    PaprMin,
    Joint,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliVars {
    #[value(name = "rcs")]
    Rcs,
    #[value(name = "rcs+c2")]
    RcsC2,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliBaseline {
    Conventional,
    Gps,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliSource {
    Conventional,
    Gps,
    Proposed,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliChannel {
    Awgn,
    DoublySelective,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<AfdmError> for Failure {
    fn from(e: AfdmError) -> Self {
        match e {
            AfdmError::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Config(format!("bad grid {text:?}: {e}")))?;
    match parts.as_slice() {
        [x] => Ok(vec![*x]),
        [a, step, b] if *step > 0.0 && b >= a => {
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| a + step * k as f64).collect())
        }
        _ => Err(Failure::Config(format!("grid {text:?} must be start:step:stop with a positive step"))),
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut rc = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        rc.seed = s;
    }
    if let Some(o) = &common.out {
        rc.out = o.clone();
    }
    if let Some(t) = common.threads {
        rc.threads = t;
    }
    Ok(rc)
}

fn source(s: CliSource) -> Source {
    match s {
        CliSource::Conventional => Source::Conventional,
        CliSource::Gps => Source::Gps,
        CliSource::Proposed => Source::Proposed,
    }
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    match cli.command {
        Command::Design { common, mode, vars, rcs_ratio, gamma, seeds, iters, baseline, accelerate } => {
            let mut rc = load(&common)?;
            let opt = &mut rc.optimizer;
            if let Some(m) = mode {
                opt.mode = match m {
                    CliMode::AfShape => Mode::AfShape,
                    CliMode::PaprMin => Mode::PaprMin,
                    CliMode::Joint => Mode::Joint,
                };
            }
            if let Some(v) = vars {
                opt.variables = match v {
                    CliVars::Rcs => VariableSet::RcsOnly,
                    CliVars::RcsC2 => VariableSet::RcsPlusPrechirp,
                };
            }
            if let Some(g) = gamma {
                opt.gamma_db = g;
            }
            if let Some(i) = iters {
                opt.r_max = i;
            }
            opt.accelerate |= accelerate;
            if let Some(r) = rcs_ratio {
                rc.system.rcs_ratio = r;
                rc.system.reserved = None;
            }
            if let Some(s) = seeds {
                rc.design.seeds = s;
            }
            if let Some(b) = baseline {
                rc.design.baseline = Some(match b {
                    CliBaseline::Conventional => Source::Conventional,
                    CliBaseline::Gps => Source::Gps,
                });
            }
            Ok(cmd_design(&rc)?)
        }
        Command::Evaluate { common, files } => {
            let rc = load(&common)?;
            if files.is_empty() {
                return Err(Failure::Config("no waveform files given".into()));
            }
            Ok(cmd_evaluate(&rc, &files)?)
        }
        Command::Ccdf { common, source: s, trials } => {
            let mut rc = load(&common)?;
            if let Some(s) = s {
                rc.ccdf.source = source(s);
            }
            if let Some(t) = trials {
                rc.ccdf.trials = t;
            }
            Ok(cmd_ccdf(&rc)?)
        }
        Command::Sense { common, pfa, snr, trials } => {
            let mut rc = load(&common)?;
            let scn = &mut rc.sense.scenario;
            if let Some(p) = pfa {
                scn.cfar.pfa = p;
            }
            if let Some(g) = snr {
                scn.snr_db = parse_grid(&g)?;
            }
            if let Some(t) = trials {
                scn.trials = t;
            }
            Ok(cmd_sense(&rc)?)
        }
        Command::Ber { common, ibo, ideal_pa, channel, snr } => {
            let mut rc = load(&common)?;
            let scn = &mut rc.ber.scenario;
            if let Some(i) = ibo {
                scn.ibo_db = Some(i);
            }
            if ideal_pa {
                scn.ibo_db = None;
            }
            if let Some(c) = channel {
                scn.channel = match c {
                    CliChannel::Awgn => ChannelKind::Awgn,
                    CliChannel::DoublySelective => ChannelKind::DoublySelective {
                        profile_db: vec![0.0, -5.0, -10.0],
                        cp: 16,
                        doppler_max: 2.0,
                        fixed: false,
                    },
                };
            }
            if let Some(g) = snr {
                scn.snr_db = parse_grid(&g)?;
            }
            Ok(cmd_ber(&rc)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            for f in &report.written {
                println!("wrote {f}");
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("error: {f}");
                }
                ExitCode::from(2)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
