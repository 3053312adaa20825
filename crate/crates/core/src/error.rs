use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error(
        "quadrature did not converge in {context}: successive refinements differ by {difference:e}"
    )]
    QuadratureNonConvergence {
        context: &'static str,
        difference: f64,
    },

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// True for failures caused by numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericDomain(_)
                | Error::QuadratureNonConvergence { .. }
                | Error::NonConvergence(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
