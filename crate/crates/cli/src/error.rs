use std::path::PathBuf;

use serde_json::json;
use tfim_core::error::{FssError, SolverError, SweepError};

/// Process exit codes. These are part of the command-line interface.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const RESOURCE: u8 = 3;
    pub const SOLVER: u8 = 4;
    pub const FSS: u8 = 5;
    pub const IO: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("missing input {path}: {message}")]
    MissingInput { path: PathBuf, message: String },
    #[error("resource gate: {0}")]
    Resource(String),
    #[error("solver failed at lambda = {lambda}: {source}")]
    Solver { lambda: f64, source: SolverError },
    #[error(transparent)]
    Fss(#[from] FssError),
    #[error("verification failed: {}", .0.join(", "))]
    Verify(Vec<String>),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::MissingInput { .. } => exit::CONFIG,
            CliError::Resource(_) => exit::RESOURCE,
            CliError::Solver { .. } => exit::SOLVER,
            CliError::Fss(_) => exit::FSS,
            CliError::Verify(_) => exit::VERIFY_FAILED,
            CliError::Io(_) => exit::IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::MissingInput { .. } => "missing-input",
            CliError::Resource(_) => "resource",
            CliError::Solver { .. } => "solver",
            CliError::Fss(_) => "fss",
            CliError::Verify(_) => "verify",
            CliError::Io(_) => "io",
        }
    }

    /// One-line machine-readable description for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Solver { lambda, .. } => v["lambda"] = json!(lambda),
            CliError::Verify(names) => v["failed_checks"] = json!(names),
            CliError::MissingInput { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v.to_string()
    }

    /// Errors while reading inputs that a previous command should have written.
    pub fn input(e: SweepError) -> Self {
        match e {
            SweepError::Io { path, source } => CliError::MissingInput {
                path,
                message: source.to_string(),
            },
            SweepError::Format { path, message } => CliError::MissingInput { path, message },
            other => CliError::Config(other.to_string()),
        }
    }

    /// Errors while writing outputs.
    pub fn output(e: SweepError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Solver { lambda, source } => CliError::Solver { lambda, source },
            SweepError::Io { .. } | SweepError::Format { .. } => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
