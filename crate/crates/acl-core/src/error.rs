//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto the process exit codes used by the CLI:
/// configuration/usage problems exit 2, data/format problems exit 3,
/// numeric failures exit 4.
#[derive(Debug, Error)]
pub enum AclError {
    /// Incompatible shapes in a matrix or layer operation.
    #[error("dimension mismatch in {context}: {lhs} vs {rhs}")]
    Dim {
        context: String,
        lhs: String,
        rhs: String,
    },

    /// Invalid configuration value or unknown configuration key.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid dataset content (labels out of range, empty domain, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Malformed file content. `section` names the part of the file that
    /// failed validation.
    #[error("format error in {section}: {message}")]
    Format { section: String, message: String },

    /// Non-finite values or other numeric breakdowns.
    #[error("numeric error in {context}: {message}")]
    Numeric { context: String, message: String },

    /// Caller misuse of an API (e.g. metrics without labels).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl AclError {
    pub fn dim(context: impl Into<String>, lhs: impl ToString, rhs: impl ToString) -> Self {
        AclError::Dim {
            context: context.into(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }

    pub fn format(section: impl Into<String>, message: impl Into<String>) -> Self {
        AclError::Format {
            section: section.into(),
            message: message.into(),
        }
    }

    pub fn numeric(context: impl Into<String>, message: impl Into<String>) -> Self {
        AclError::Numeric {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            AclError::Config(_) | AclError::Usage(_) => 2,
            AclError::Data(_) | AclError::Format { .. } | AclError::Io(_) => 3,
            AclError::Dim { .. } | AclError::Numeric { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, AclError>;
