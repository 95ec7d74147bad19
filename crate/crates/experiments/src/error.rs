use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] unruh_core::Error),

    #[error("cannot {action} `{path}`: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{figure}: {failed} embedded assertion(s) failed")]
    Assertions { figure: String, failed: usize },
}

impl LabError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Core(unruh_core::Error::InvalidParameter { .. }) => "invalid-parameter",
            LabError::Core(_) => "numerics",
            LabError::Io { .. } => "io",
            LabError::Config(_) => "config",
            LabError::Assertions { .. } => "assertion",
        }
    }

    /// One-line JSON object `{"error": kind, "message": text}`.
    pub fn json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
