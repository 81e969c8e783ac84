//! Waveform files, CSV writers, run manifests and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};
use crate::signal::{DesignVector, ModulationMatrices};

/// File magic, NUL-padded to 16 bytes.
pub const MAGIC: [u8; 16] = *b"AFDMWAVE\0\0\0\0\0\0\0\0";
const HEADER: usize = 24;

/// Oversampled transmit samples with their dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub n: u32,
    pub oversampling: u32,
    pub samples: Vec<Complex64>,
}

impl Waveform {
    pub fn from_design(cfg: &AfdmConfig, mm: &ModulationMatrices, design: &DesignVector) -> Result<Self> {
        Ok(Self {
            n: cfg.n as u32,
            oversampling: cfg.oversampling as u32,
            samples: mm.synthesize_oversampled(&design.effective(cfg))?,
        })
    }

    /// Symbol-rate samples recovered by decimation.
    pub fn symbol_rate(&self) -> Vec<Complex64> {
        let lp = self.oversampling as usize;
        let scale = (lp as f64).sqrt();
        self.samples.iter().step_by(lp).map(|z| z * scale).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + 16 * self.samples.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.oversampling.to_le_bytes());
        for z in &self.samples {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER || bytes[..16] != MAGIC {
            return Err(AfdmError::Format("missing waveform magic".into()));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"));
        let n = word(16);
        let oversampling = word(20);
        if n == 0 || oversampling == 0 {
            return Err(AfdmError::Format("zero dimension in header".into()));
        }
        let count = n as usize * oversampling as usize;
        let body = &bytes[HEADER..];
        if body.len() != 16 * count {
            return Err(AfdmError::Format(format!("expected {} sample bytes, found {}", 16 * count, body.len())));
        }
        let samples = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8-byte slice"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8-byte slice"));
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self { n, oversampling, samples })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| AfdmError::Format(format!("no file name in {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Samples as `index,re,im`.
pub fn samples_csv(samples: &[Complex64]) -> String {
    let mut out = String::from("index,re,im\n");
    for (i, z) in samples.iter().enumerate() {
        out.push_str(&format!("{i},{:.17e},{:.17e}\n", z.re, z.im));
    }
    out
}

/// Generic CSV from a header and rows of already formatted fields.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Per-run record of what produced the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub files: Vec<String>,
}

/// Sidecar description of one stored design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignMetadata {
    pub source: String,
    pub mode: Option<String>,
    pub variables: Option<String>,
    pub seed: u64,
    pub gamma_db: Option<f64>,
    pub rcs_ratio: f64,
    pub prechirp: Vec<usize>,
    pub symbols: Vec<usize>,
    pub isl: f64,
    pub papr_db: f64,
    pub created_unix: u64,
}
