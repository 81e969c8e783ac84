//! Static system description: subcarrier count, chirp parameters, the
//! data/reserved split, the pre-chirp alphabet and the data constellation.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AfdmError, Result};

/// Default small irrational rotation of the pre-chirp octagon.
pub const DEFAULT_DELTA: f64 = PI * 1e-4 * SQRT_2;

/// Split of the chirp-subcarriers into data (D) and reserved (R) sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcarrierPartition {
    n: usize,
    data: Vec<usize>,
    reserved: Vec<usize>,
}

impl SubcarrierPartition {
    /// Build from an explicit reserved index set; every other index carries data.
    pub fn new(n: usize, reserved: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &m in reserved {
            if m >= n {
                return Err(AfdmError::Config(format!("reserved index {m} out of range for N={n}")));
            }
            if mask[m] {
                return Err(AfdmError::Config(format!("reserved index {m} listed twice")));
            }
            mask[m] = true;
        }
        let data = (0..n).filter(|&m| !mask[m]).collect();
        let reserved = (0..n).filter(|&m| mask[m]).collect();
        Ok(Self { n, data, reserved })
    }

    /// Evenly spaced comb: reserved index k sits at floor(k N / count).
    pub fn comb(n: usize, count: usize) -> Result<Self> {
        if count > n {
            return Err(AfdmError::Config(format!("cannot reserve {count} of {n} subcarriers")));
        }
        let idx: Vec<usize> = (0..count).map(|k| k * n / count).collect();
        Self::new(n, &idx)
    }

    /// Comb partition with |R| = round(ratio * N).
    pub fn from_ratio(n: usize, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(AfdmError::Config(format!("reserved ratio {ratio} outside [0, 1]")));
        }
        Self::comb(n, (ratio * n as f64).round() as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[usize] {
        &self.data
    }

    pub fn reserved(&self) -> &[usize] {
        &self.reserved
    }

    /// Boolean mask, true on reserved subcarriers.
    pub fn reserved_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &m in &self.reserved {
            mask[m] = true;
        }
        mask
    }

    pub fn ratio(&self) -> f64 {
        self.reserved.len() as f64 / self.n as f64
    }
}

/// Octagonal pre-chirp phase set phi_l = phi0 + delta + 2 pi l / Q, expressed
/// directly in the design-vector domain u[m] = exp(j 2 pi c2 m^2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrechirpAlphabet {
    pub size: usize,
    pub phi0: f64,
    pub delta: f64,
}

impl Default for PrechirpAlphabet {
    fn default() -> Self {
        Self { size: 8, phi0: 0.0, delta: DEFAULT_DELTA }
    }
}

impl PrechirpAlphabet {
    pub fn phase(&self, l: usize) -> f64 {
        self.phi0 + self.delta + 2.0 * PI * l as f64 / self.size as f64
    }

    /// Unit-modulus points available on subcarrier m. Subcarrier 0 only admits 1.
    pub fn points(&self, m: usize) -> Vec<Complex64> {
        if m == 0 {
            return vec![Complex64::new(1.0, 0.0)];
        }
        (0..self.size).map(|l| Complex64::from_polar(1.0, self.phase(l))).collect()
    }

    /// The pre-chirp coefficient c2 that realizes point l on subcarrier m.
    pub fn c2(&self, m: usize, l: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        self.phase(l) / (2.0 * PI * (m * m) as f64)
    }

    /// Index of the alphabet point nearest to `z` on subcarrier m.
    pub fn nearest(&self, m: usize, z: Complex64) -> usize {
        if m == 0 {
            return 0;
        }
        let pts = self.points(m);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (l, p) in pts.iter().enumerate() {
            let d = (p - z).norm_sqr();
            if d < best_d {
                best_d = d;
                best = l;
            }
        }
        best
    }
}

/// Gray-labelled M-PSK constellation with points exp(j 2 pi k / M).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Psk {
    pub bits: u32,
}

impl Default for Psk {
    fn default() -> Self {
        Self { bits: 3 }
    }
}

impl Psk {
    pub fn order(&self) -> usize {
        1 << self.bits
    }

    pub fn point(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.order() as f64)
    }

    /// Gray label carried by symbol index k.
    pub fn label(&self, k: usize) -> usize {
        k ^ (k >> 1)
    }

    /// Symbol index carrying Gray label `g`.
    pub fn index_of_label(&self, g: usize) -> usize {
        let mut k = 0;
        let mut g = g & (self.order() - 1);
        while g > 0 {
            k ^= g;
            g >>= 1;
        }
        k
    }

    /// Hard decision: nearest point by angle.
    pub fn decide(&self, z: Complex64) -> usize {
        let m = self.order() as f64;
        let k = (z.arg() / (2.0 * PI) * m).round().rem_euclid(m);
        k as usize % self.order()
    }
}

/// Complete static AFDM description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfdmConfig {
    pub n: usize,
    pub c1: f64,
    pub oversampling: usize,
    /// Symbol duration; delta t = T / N.
    pub period: f64,
    pub alphabet: PrechirpAlphabet,
    pub partition: SubcarrierPartition,
    pub constellation: Psk,
}

impl AfdmConfig {
    pub fn new(n: usize, c1: f64, partition: SubcarrierPartition) -> Result<Self> {
        let cfg = Self {
            n,
            c1,
            oversampling: 4,
            period: 1.0,
            alphabet: PrechirpAlphabet::default(),
            partition,
            constellation: Psk::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reference system: N = 128, c1 = 21 / 2N, 8PSK, octagon, 4x oversampling.
    pub fn reference(reserved_ratio: f64) -> Result<Self> {
        let n = 128;
        Self::new(n, 21.0 / (2.0 * n as f64), SubcarrierPartition::from_ratio(n, reserved_ratio)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(AfdmError::Config(format!("N must be even and at least 2, got {}", self.n)));
        }
        let cpp = 2.0 * self.n as f64 * self.c1;
        if (cpp - cpp.round()).abs() > 1e-9 || cpp < -1e-9 {
            return Err(AfdmError::Config(format!("2 N c1 = {cpp} is not a non-negative integer")));
        }
        if self.oversampling == 0 {
            return Err(AfdmError::Config("oversampling factor must be at least 1".into()));
        }
        if !(self.period > 0.0) {
            return Err(AfdmError::Config("symbol period must be positive".into()));
        }
        if self.alphabet.size == 0 {
            return Err(AfdmError::Config("pre-chirp alphabet is empty".into()));
        }
        if self.partition.n() != self.n {
            return Err(AfdmError::Config(format!(
                "partition covers {} subcarriers, config has {}",
                self.partition.n(),
                self.n
            )));
        }
        if self.constellation.bits == 0 || self.constellation.bits > 16 {
            return Err(AfdmError::Config("constellation bits must lie in 1..=16".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Normalized chirp rate c1' = c1 / dt^2.
    pub fn c1_prime(&self) -> f64 {
        self.c1 / (self.dt() * self.dt())
    }

    /// Number of frequency wraps C = 2 N c1.
    pub fn wraps(&self) -> usize {
        (2.0 * self.n as f64 * self.c1).round() as usize
    }

    pub fn with_partition(&self, partition: SubcarrierPartition) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.partition = partition;
        cfg.validate()?;
        Ok(cfg)
    }
}
