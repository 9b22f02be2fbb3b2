use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The driver specification or experiment configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation received an argument outside of its domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A state violated a structural invariant (e.g. an unordered workload vector).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An enumeration or horizon cap was exceeded.
    #[error("resource cap exceeded: {what} needs {size} but the cap is {cap}")]
    Resource { what: String, size: u128, cap: u128 },

    /// A verification check failed.
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;
