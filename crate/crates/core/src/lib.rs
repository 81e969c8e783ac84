//! AFDM waveform design: ambiguity-function sidelobe shaping and PAPR control
//! through reserved chirp-subcarriers and discrete pre-chirp selection.

pub mod baselines;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod optimizer;
pub mod run;
pub mod signal;
pub mod sim;

pub use config::{AfdmConfig, PrechirpAlphabet, Psk, SubcarrierPartition};
pub use error::{AfdmError, Result};
pub use metrics::{AfGrid, LazSpec, PaprReport, QuadFormCache};
pub use optimizer::{run_jipd_mm, DesignResult, Mode, OptimizerOptions, VariableSet};
pub use signal::{DesignVector, ModulationMatrices};
