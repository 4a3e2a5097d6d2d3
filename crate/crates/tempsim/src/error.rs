//! Error type shared across the simulator.

/// Errors produced by model evaluation, configuration and the CLI pipelines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model evaluated outside its validity domain (temperature outside the
    /// table range, non-positive bias current, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or scenario. The message carries the field path.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or exhausted input data (period streams, comparison rows).
    #[error("input error: {0}")]
    Input(String),

    /// Calibration could not be established (non-increasing codes, ...).
    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 model/domain, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Domain(_) | Error::Input(_) | Error::Calibration(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
