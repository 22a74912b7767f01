//! Error type shared by every module in this crate.

use thiserror::Error;

/// Errors produced by grid construction, propagation, and measurement.
#[derive(Debug, Error)]
pub enum SolqError {
    /// Invalid user-supplied parameter or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Propagation aborted; `xi` is the position reached when the check fired.
    #[error("propagation error at xi = {xi}: {msg}")]
    Propagation { xi: f64, msg: String },

    /// Non-finite value or violated conservation law in a numeric kernel.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Measurement requested on a band or ensemble that cannot support it.
    #[error("measurement error: {0}")]
    Measurement(String),

    /// Launch tuning failed to bracket or converge.
    #[error("tuning error: {0}")]
    Tuning(String),
}

pub type SolqResult<T> = Result<T, SolqError>;
