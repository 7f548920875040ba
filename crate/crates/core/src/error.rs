use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, parameters or mismatched inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite or otherwise malformed sample data.
    #[error("data error: {0}")]
    Data(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A weight table would exceed the configured memory cap.
    #[error("{what} requires {required} bytes, above the memory cap of {cap} bytes")]
    Capacity {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("non-finite state produced at step {step}")]
    NonFinite { step: usize },

    #[error("weight cache: {0}")]
    Cache(String),

    #[error("weight cache checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum { stored: u64, computed: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
