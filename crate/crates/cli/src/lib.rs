//! Batch driver for the ipm-core experiments: configuration, commands and on-disk outputs.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::Value;

pub use commands::{execute, Outcome};
pub use config::{parse_config, Command, ParseOutcome, RunConfig, UsageError};
pub use output::{Manifest, Table};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    Core(ipm_core::Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Core(_) | RunError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "usage error: {e}"),
            RunError::Core(e) => write!(f, "computation failed: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Executes the command, writes its CSVs and manifest.json, and returns the exit code to use.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let outcome = execute(cfg).map_err(|e| match e {
        commands::CommandError::Usage(u) => RunError::Usage(u),
        commands::CommandError::Core(c) => RunError::Core(c),
    })?;
    let files = output::write_tables(&cfg.output_dir, &outcome.tables).map_err(RunError::Io)?;
    let manifest = Manifest {
        command: cfg.command.name().to_string(),
        config: serde_json::to_value(cfg).unwrap_or(Value::Null),
        version: env!("CARGO_PKG_VERSION").to_string(),
        results: outcome.results,
        files,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let manifest_path = output::write_manifest(&cfg.output_dir, &manifest).map_err(RunError::Io)?;
    let exit_code = if outcome.passed { EXIT_SUCCESS } else { EXIT_FAILURE };
    Ok(RunSummary { exit_code, manifest, manifest_path })
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(ParseOutcome::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
        Err(ParseOutcome::Usage(e)) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    match run(&cfg) {
        Ok(s) => {
            let results = serde_json::to_string(&s.manifest.results).unwrap_or_default();
            println!("{} {}", s.manifest_path.display(), results);
            if s.exit_code != EXIT_SUCCESS {
                eprintln!("{}: scientific check failed", cfg.command.name());
            }
            s.exit_code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
