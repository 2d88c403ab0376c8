use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its target.
    #[error("numeric failure: {message}")]
    Numeric {
        message: String,
        /// Best available estimate when the procedure stopped, if any.
        best_estimate: Option<f64>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, best_estimate: Option<f64>) -> Self {
        Error::Numeric {
            message: msg.into(),
            best_estimate,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
