//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by profile validation, chain construction, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates one of the profile or pipeline invariants.
    /// The message names the violated invariant.
    #[error("configuration error: {violation}")]
    Config { violation: String },

    /// An input sequence has the wrong length for the requested operation.
    #[error("{what}: expected {expected}, got {actual}")]
    Length {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Inputs that must share a sample rate do not.
    #[error("sample-rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(f64, f64),

    /// A text artifact (profile config, mask file, I/Q header) failed to parse.
    #[error("parse error in {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for a named invariant violation.
    pub fn config(violation: impl Into<String>) -> Self {
        Error::Config {
            violation: violation.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
