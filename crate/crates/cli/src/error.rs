use std::fmt;

use expose_core::fitting::FitError;
use expose_core::ingest::IngestError;
use expose_core::model_file::ModelFileError;
use expose_core::{ExposureError, ScenarioError};

/// Failure classes, each mapped to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numeric => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Usage, source: anyhow::anyhow!("{msg}") }
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        Self { kind: ErrorKind::Data, source: err.into() }
    }

    pub fn numeric(err: impl Into<anyhow::Error>) -> Self {
        Self { kind: ErrorKind::Numeric, source: err.into() }
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        Self { kind: self.kind, source: self.source.context(msg) }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e)
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::data(e)
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        CliError::data(e)
    }
}

impl From<ExposureError> for CliError {
    fn from(e: ExposureError) -> Self {
        CliError::data(e)
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::NonConvergence { .. } | FitError::NonFinite => CliError::numeric(e),
            _ => CliError::data(e),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Unreachable(_) => CliError::numeric(e),
            _ => CliError::data(e),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::data(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::data(e)
    }
}
