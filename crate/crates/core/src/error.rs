use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inconsistent setup.
    #[error("configuration error: {0}")]
    Config(String),

    /// A requested operation would move probability off the simulation grid.
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite values or a solver that did not converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Hold-time calibration could not locate a contrast collapse.
    #[error("calibration failure: {0}")]
    Calibration(String),

    /// A physical invariant was violated beyond tolerance.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
