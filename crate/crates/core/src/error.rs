use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input failed a structural check (hermiticity, trace, shape, support).
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested object would exceed the configured dimension cap.
    #[error("resource error: required dimension {required} exceeds cap {cap}")]
    Resource { required: usize, cap: usize },

    /// Numerical data violated an assumption (convexity, irreducibility, limits).
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
