use thiserror::Error;

/// Errors surfaced by the counting, density and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// Two independent routes disagreed, or an exactness assertion failed.
    /// Always indicates a bug rather than bad input.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("ill-conditioned fit: {0}")]
    Fit(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("cache line {line}: {msg}")]
    Cache { line: usize, msg: String },

    #[error("estimated cost {estimate:.3e} exceeds limit {limit:.3e}")]
    CostRefused { estimate: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
