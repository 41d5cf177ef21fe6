use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid walk spec (d={d}, d1={d1}, d2={d2}): {reason}")]
    InvalidSpec {
        d: usize,
        d1: usize,
        d2: usize,
        reason: &'static str,
    },
    #[error("coordinate overflow at step {step}")]
    CoordinateOverflow { step: u64 },
    #[error("run of {requested} steps exceeds the cap of {cap}")]
    TooManySteps { requested: u64, cap: u64 },
    #[error("path enumeration limited to {max} steps, got {requested}")]
    EnumerationTooLarge { requested: usize, max: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("adapted rule selected measure {index} but only {count} are available")]
    RuleIndexOutOfRange { index: usize, count: usize },
    #[error("Jacobi sweep did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bridge length must be even, got {0}")]
    OddBridge(u64),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series too short: need length {needed}, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
