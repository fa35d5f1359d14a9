use thiserror::Error;

/// Errors surfaced by the solvers, the benchmark harness and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: wrong dimension, out-of-range parameter, unknown name.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A computation produced NaN/Inf or a decomposition failed.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The adaptive RPNN driver halved the interval below its floor.
    #[error("adaptive step underflow at x = {x}: width {width:e} below floor {floor:e} (last residual norm {last_residual:e})")]
    StepUnderflow {
        x: f64,
        width: f64,
        floor: f64,
        last_residual: f64,
    },

    /// A reference integrator could not continue.
    #[error("integrator failed at x = {x}: {reason}")]
    IntegratorFailure { x: f64, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// A file parsed but its contents are inconsistent.
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
