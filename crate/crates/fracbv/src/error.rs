use thiserror::Error;

/// Errors produced by the fracbv library and CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data or configuration (CLI exit code 2).
    #[error("validation: {0}")]
    Validation(String),

    /// A certified mathematical invariant failed at run time (CLI exit code 3).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The front-tracking event loop exceeded its interaction budget.
    #[error("event storm: {count} interactions processed, stopped at t = {t_reached}")]
    EventStorm { count: usize, t_reached: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
