use std::path::Path;

use ntpgeo_core::Error as CoreError;
use serde::Serialize;

/// Runtime failure, reported on stderr as one JSON object.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(error: &'static str, message: impl Into<String>) -> Self {
        Self {
            error,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new("io", format!("{}: {e}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::EmptyCorpus => "empty-corpus",
            CoreError::NoContexts => "no-contexts",
            CoreError::VocabularyTooSmall(_) => "vocabulary-too-small",
            CoreError::InvalidConfig(_) => "invalid-config",
            CoreError::DimensionMismatch { .. } => "dimension-mismatch",
            CoreError::InvalidMatrix(_) => "invalid-matrix",
            CoreError::InvalidDistribution(_) => "invalid-distribution",
            CoreError::NonConvergence { .. } => "non-convergence",
            CoreError::TooLarge(_) => "too-large",
            CoreError::NonFinite => "non-finite",
            CoreError::UnknownConcept { .. } => "unknown-concept",
            CoreError::DuplicateDim(_) => "duplicate-dim",
            CoreError::NotPowerOfTwo(_) => "not-power-of-two",
            CoreError::Divergence { .. } => "divergence",
            CoreError::DimTooSmall { .. } => "dim-too-small",
            CoreError::Format(_) => "format",
            CoreError::Io(_) => "io",
            CoreError::Json(_) => "json",
        };
        Self::new(kind, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new("json", e.to_string())
    }
}

impl From<ntpgeo_server::SessionError> for CliError {
    fn from(e: ntpgeo_server::SessionError) -> Self {
        match e {
            ntpgeo_server::SessionError::Core(e) => e.into(),
            other => Self::new("bundle", other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
