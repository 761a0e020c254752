use std::path::PathBuf;

use serde::Serialize;

/// Failures surfaced by the frontend. Validation failures exit with code 1 and
/// numerical verification failures with code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] markovkit_core::Error),
    #[error("cannot access `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed state file: {0}")]
    Format(String),
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error("report field `{0}` is not a finite number")]
    NonFinite(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_verification(&self) -> bool {
        match self {
            CliError::Core(e) => e.is_verification(),
            CliError::NonFinite(_) => true,
            _ => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_verification() {
            2
        } else {
            1
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.is_verification() {
            "verification"
        } else {
            "validation"
        }
    }

    /// Machine-readable error object.
    pub fn to_report(&self) -> ErrorReport {
        ErrorReport {
            schema: crate::report::SCHEMA,
            error: ErrorBody {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub schema: &'static str,
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;
