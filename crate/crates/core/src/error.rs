use thiserror::Error;

/// Errors raised by the analytical and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A configuration field failed validation.
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A numerical routine stopped before meeting its tolerance.
    #[error("{what} did not converge: estimate {estimate:e}, achieved error {achieved:e} (requested {requested:e})")]
    Convergence {
        what: &'static str,
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    /// A result could not be represented (overflow).
    #[error("overflow in {0}")]
    Overflow(&'static str),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerics rather than inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Overflow(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
