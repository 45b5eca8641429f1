//! Command-line front end and verification harness for `toc-core`.

use toc_core::ValidationReport;

pub mod cli;
pub mod document;
pub mod generator;
pub mod harness;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Schema(String),
    #[error("invalid pipeline: {0}")]
    Validation(ValidationReport),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] toc_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit code: 2 when a computed result contradicts an
    /// independent recomputation, 1 for every other failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(toc_core::Error::Inconsistent(_)) => 2,
            _ => 1,
        }
    }
}
