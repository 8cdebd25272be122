//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimensions for the operation.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Invalid configuration or construction arguments.
    #[error("invalid config: {0}")]
    Config(String),

    /// A loss, gradient, or update target stopped being finite.
    #[error("training diverged: non-finite value in {0}")]
    NonFinite(&'static str),

    /// The expert oracle could not answer for the given state.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// Malformed input text (config files, CSV, layouts, checkpoints).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            context,
            expected,
            got,
        }
    }
}
