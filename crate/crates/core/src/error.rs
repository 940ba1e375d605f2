use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    Singularity(String),

    #[error("ill-conditioned system (condition estimate {condition:.3e} exceeds cap {cap:.3e})")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("unobservable configuration: {reason} (condition estimate {condition:.3e})")]
    Unobservable { reason: String, condition: f64 },

    #[error("problem too large: {0}")]
    Size(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singularity(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
