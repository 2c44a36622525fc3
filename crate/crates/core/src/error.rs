use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is well-formed but not handled by this operation.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A size limit was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Numerical integration did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:.6e}, last change {change:.3e}, tolerance {tolerance:.3e} after {levels} refinements")]
    NotConverged {
        estimate: f64,
        change: f64,
        tolerance: f64,
        levels: usize,
    },

    /// A plane-wave sum was truncated too early.
    #[error("mode cutoff {cutoff} too small, need at least {required}")]
    InsufficientCutoff { cutoff: usize, required: usize },

    /// A computed quantity violated an invariant that must hold analytically.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}
