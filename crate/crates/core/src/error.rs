use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, mode sum or quadrature did not reach the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// `1 - M` could not be factorized; the discretization is under-resolved.
    #[error("factorization of 1 - M failed for mode m = {mode}: {reason}")]
    Factorization { mode: usize, reason: String },

    /// A rational model violates its invariants.
    #[error("invalid rational model: {0}")]
    InvalidModel(String),

    /// The minimax fit stopped without meeting its convergence criteria.
    #[error("fit did not converge: {message}")]
    Fit {
        message: String,
        best: Box<crate::fitting::FitReport>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
