use thiserror::Error;

/// Errors raised by oracles, maximizers and the verification helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element {id} is outside the ground set of size {n}")]
    ElementOutOfRange { id: usize, n: usize },

    #[error("element {0} is already in the cursor set")]
    DuplicateCommit(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ground set of size {n} exceeds the enumeration guard of {max}")]
    GuardExceeded { n: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
