use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Mathematical precondition violated by the input (non-PD metric,
    /// point outside a domain, non-finite entries, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The call itself is malformed (wrong basis, wrong kind, bad step).
    #[error("usage error: {0}")]
    Usage(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown identifier `{0}`")]
    Unknown(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for errors that originate in the mathematics of the input rather
    /// than in how the API was called.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}
