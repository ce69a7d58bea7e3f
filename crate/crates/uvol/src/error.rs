//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by pricing, parsing, simulation and the batch runner.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid market data, grid parameters or operation preconditions.
    #[error("domain error: {0}")]
    Domain(String),

    /// Payoff expression could not be parsed. `position` is a byte offset
    /// into the source text.
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// Payoff expression failed to evaluate. `node` is the canonical form
    /// of the offending subexpression.
    #[error("evaluation error in `{node}`: {message}")]
    Eval { node: String, message: String },

    /// A payoff was handed to the path-dependent chain that cannot be
    /// reduced to a single summary statistic.
    #[error("unsupported payoff: {0}")]
    UnsupportedPayoff(String),

    /// PDE solver failure (stability violation, non-convergent policy
    /// iteration) with diagnostics.
    #[error("solver error: {0}")]
    Solver(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
