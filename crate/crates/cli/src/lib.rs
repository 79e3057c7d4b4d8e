//! Batch verification runs, epsilon sweeps and single-pair inspection on top
//! of `entrolab-core`.
//!
//! Every command returns an [`Outcome`] holding the rendered report and the
//! exit code: 0 when every applicable check passes, 1 on any failed check and
//! 2 on configuration or input errors.

mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

pub use commands::{cmd_inspect, cmd_sweep, cmd_verify, SweepRow, TrialRecord};
pub use config::{Command, InspectInputs, OutputFormat, RunConfig, SweepOptions};
pub use output::write_atomic;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Version tag of the JSON and CSV report layouts.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] entrolab_core::Error),

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: entrolab_core::Error,
    },

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

/// Rendered report and exit code of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: String,
}

/// Runs the configured command.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Verify => cmd_verify(config),
        Command::Sweep => cmd_sweep(config),
        Command::Inspect => cmd_inspect(config),
    }
}

/// Runs the command and writes its report to `config.out` (atomically) or to
/// stdout. Errors go to stderr. Returns the process exit code.
pub fn execute(config: &RunConfig) -> i32 {
    let result = run(config).and_then(|outcome| {
        match &config.out {
            Some(path) => write_atomic(path, outcome.report.as_bytes())?,
            None => print!("{}", outcome.report),
        }
        Ok(outcome.exit_code)
    });
    result.unwrap_or_else(|e| {
        eprintln!("entrolab: {e}");
        e.exit_code()
    })
}
