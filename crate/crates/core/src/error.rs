use thiserror::Error;

use crate::quadrature::QuadratureError;

/// Errors raised by the verification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent p = {0} is outside 1 < p < inf")]
    InvalidExponent(f64),

    #[error("{name} = {value} is outside the domain {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// True when the failure is numerical rather than a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
