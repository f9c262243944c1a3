//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input (bad grid, negative weight, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A rate or discount factor outside the admissible domain of a convention.
    #[error("domain violation for {convention}: {message}")]
    Domain { convention: String, message: String },

    /// Maturity beyond the last grid point of a curve without a tail model.
    #[error("maturity {requested} beyond curve horizon {horizon} (attach a tail model to extrapolate)")]
    OutOfHorizon { requested: f64, horizon: f64 },

    /// The factor cannot be recovered from the rate at this time.
    #[error("no inverse at t={t}: rate does not depend on the factor (degenerate coefficients)")]
    NoInverse { t: f64 },

    /// Recovered factor is not strictly positive: the rate is not attainable.
    #[error("rate {value} outside attainable range ({lo}, {hi}) at t={t}")]
    OutsideRange { value: f64, lo: f64, hi: f64, t: f64 },

    /// Two-factor F/G/H denominator vanishes.
    #[error("no short-rate/long-rate decomposition at t={t}: coefficient system is rank deficient")]
    NoDecomposition { t: f64 },

    /// Operation needs data the model does not carry (e.g. derivatives).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("long Libor rate requires tail index 1, model has {found}; use the tail-Pareto long rate")]
    WrongIndex { found: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error at {path}: {message}")]
    Json { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
