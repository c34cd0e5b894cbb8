//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Evaluation outside a chart's declared domain, or non-finite components.
    #[error("domain error: {0}")]
    Domain(String),

    /// Metric failed the Lorentzian signature test (-,+,...,+).
    #[error("signature error: {0}")]
    Signature(String),

    /// Metric matrix is degenerate and cannot be inverted.
    #[error("singular metric: {0}")]
    SingularMetric(String),

    /// Coordinate map with a singular jacobian or undefined inverse.
    #[error("chart error: {0}")]
    Chart(String),

    /// Invalid construction parameters.
    #[error("config error: {0}")]
    Config(String),

    /// CFL violation or unstable update detected.
    #[error("stability error: {0}")]
    Stability(String),

    /// Grid too small for the requested run (edge contamination, empty core).
    #[error("grid error: {0}")]
    Grid(String),

    /// Input data violates a contract (support overlap, nonzero start levels).
    #[error("data error: {0}")]
    Data(String),

    /// Operation precondition violated by the caller.
    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
