use thiserror::Error;

/// Errors raised by the waveform model, the optimizer and the simulation harness.
#[derive(Debug, Error)]
pub enum AfdmError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("time {t} outside the symbol interval [0, {period})")]
    TimeOutOfRange { t: f64, period: f64 },

    #[error("quadratic-form cache for N={n} exceeds the memory cap of {cap_bytes} bytes")]
    MemoryBudget { n: usize, cap_bytes: usize },

    #[error("cache was built for a different configuration")]
    CacheMismatch,

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("expansion point {x0} must lie in [0, {t})")]
    BoundViolation { x0: f64, t: f64 },

    #[error("zero average power")]
    ZeroPower,

    #[error("empty input")]
    Empty,

    #[error("channel delay {delay} exceeds the prefix length {cp}")]
    DelayExceedsPrefix { delay: usize, cp: usize },

    #[error("CFAR window {window}x{window} does not fit in a {rows}x{cols} map")]
    WindowTooLarge { window: usize, rows: usize, cols: usize },

    #[error("singular linear system")]
    Singular,

    #[error("peak bound retries exhausted after {0} attempts")]
    PeakBoundRetries(usize),

    #[error("corrupt waveform file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AfdmError>;
