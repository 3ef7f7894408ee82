//! Experiment runner: binds a config file to a task pipeline and writes the report, plot
//! data and a run manifest.

pub mod checks;
pub mod compare;
pub mod config;
pub mod json;
pub mod runner;
pub mod tasks;

use std::io;

pub use checks::{Check, CheckOutcome, CheckRegistry};
pub use compare::{compare_files, compare_golden, DiffSummary, FieldDiff};
pub use config::{ExperimentConfig, ModelSection, OutputSection, TaskSection, Times, Vector};
pub use json::to_canonical_string;
pub use runner::{run, sha256_hex, OutputFile, RunManifest, TaskStatus, MANIFEST_FILE, REPORT_FILE};
pub use tasks::{Context, Task, TaskOutput, TaskRegistry};

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "IDESCOPE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("not converged: {0}")]
    NonConvergence(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Domain(_) => 4,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<idescope_process::Error> for CliError {
    fn from(e: idescope_process::Error) -> Self {
        use idescope_process::Error as E;
        let msg = e.to_string();
        match e {
            E::Constraint { .. } | E::OutsideTimeDomain(_) => CliError::Domain(msg),
            E::Divergence { .. } | E::Empty(_) => CliError::NonConvergence(msg),
            E::InvalidParameter(_)
            | E::MissingMetadata(_)
            | E::Precondition(_)
            | E::Dimension { .. }
            | E::Ordering { .. } => CliError::Schema(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}
