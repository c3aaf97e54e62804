use thiserror::Error;

/// Errors raised by problem construction, solvers, metrics and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimensions, infeasible reference points, bad specs.
    #[error("input error: {0}")]
    Input(String),

    /// Solver or experiment parameters that violate a precondition.
    #[error("config error: {0}")]
    Config(String),

    /// The requested metric has no reference value or needs a bounded domain.
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
