use thiserror::Error;

/// Errors produced by the colas library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A value is outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested configuration violates the sparse-local regime
    /// (e.g. the rescaled kernel radius covers half the torus).
    #[error("regime error: {0}")]
    Regime(String),

    /// The requested evaluation is not supported for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical procedure failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Calibration could not bracket or locate a solution.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A target value is outside the attainable range of a monotone limit.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Input files could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Input data is internally inconsistent.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
