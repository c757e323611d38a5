use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid chain parameters or ensemble definition.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A post-condition residual exceeded its tolerance.
    #[error("numerical failure in {what}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Numerical {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    /// The spectrum is (numerically) degenerate, so spectral projections onto
    /// individual eigenvalues are ill-defined.
    #[error("degenerate spectrum: min gap {min_gap:e} <= threshold {threshold:e}")]
    Degenerate { min_gap: f64, threshold: f64 },

    /// Refusal to run an exponential-cost computation beyond its limit.
    #[error("{what}: size {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
