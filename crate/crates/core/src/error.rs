use thiserror::Error;

/// Errors raised by transforms, sequence builders and the Fock model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no bracket with an interior minimum before x = log r reached {x}")]
    BracketFailure { x: f64 },

    #[error("objective still increasing at x = log s = {x}; supremum is unbounded")]
    UnboundedObjective { x: f64 },

    #[error("non-finite value {value} at argument {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("series tail bound not met within {cap} terms")]
    TruncationBudgetExceeded { cap: usize },

    #[error("function decreases across the whole scan grid; minimizer not bracketed")]
    MinimizerNotBracketed,

    #[error("series composition residual {residual:e} exceeds {limit:e}")]
    PrecisionLoss { residual: f64, limit: f64 },

    #[error("degree weight unavailable: {0}")]
    WeightUnavailable(String),

    #[error("degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("growth function carries no exponential envelope constants")]
    EnvelopeMissing,

    #[error("sequence index {index} beyond materialized length {len}")]
    SequenceExhausted { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Gaussian integral diverges in mode {mode} (factor {factor})")]
    Divergent { mode: usize, factor: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
