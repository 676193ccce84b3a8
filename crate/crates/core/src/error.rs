//! Error taxonomy shared by every module.
//!
//! Three classes map onto the CLI exit codes: invalid input (validation),
//! numerical-validity violations, and resource exhaustion. Numerical and
//! resource errors carry the originating module name so failures surfaced
//! through the CLI keep their provenance.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller handed in something malformed (non-finite value, bad range,
    /// non-coprime pair, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical check failed: negative eigenvalue beyond the clipping
    /// band, boundary occupation too large, eigensolver divergence, ...
    #[error("numerical validity violated in {module}: {detail}")]
    Numerical {
        module: &'static str,
        detail: String,
    },

    /// A computation would exceed a configured hard limit (cutoff growth,
    /// block overflow).
    #[error("resource limit exceeded in {module}: {detail}")]
    Resource {
        module: &'static str,
        detail: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            detail: detail.into(),
        }
    }

    pub fn resource(module: &'static str, detail: impl Into<String>) -> Self {
        Error::Resource {
            module,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
