//! Error type shared by all estimation and synthesis routines.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or unusable configuration (dimensions, grids, parameter sets).
    #[error("configuration error: {0}")]
    Config(String),

    /// Matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix that must be positive definite or full rank is not.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Root bracketing failed: no sign change on the given interval.
    #[error("no sign change on bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// The requested moment does not exist for the given parameters.
    #[error("undefined texture mean: inverse-gamma requires shape a > 1 (got a = {shape})")]
    UndefinedMean { shape: f64 },

    /// A residual vector is numerically zero where a positive norm is required.
    #[error("degenerate (zero) residual at snapshot {snapshot}")]
    DegenerateResidual { snapshot: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
