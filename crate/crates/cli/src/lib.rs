//! Library side of the `whtor` command: document loading, task execution,
//! the verification suite and report rendering.

pub mod document;
pub mod error;
pub mod literal;
pub mod report;
pub mod run;
pub mod suite;

use std::path::Path;

pub use error::{exit, CliError};
use report::Report;

/// Default seed for the randomized suites.
pub const DEFAULT_SEED: u64 = 42;

pub const COMMANDS: [&str; 7] = ["torsion", "invariants", "rho", "glue", "s1", "transfer", "verify"];

/// Loads `path` and runs `command` on it.
pub fn execute(command: &str, path: &Path, seed: u64, timings: bool) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path)?;
    execute_text(command, &text, seed, timings)
}

pub fn execute_text(command: &str, text: &str, seed: u64, timings: bool) -> Result<Report, CliError> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::Usage(format!("unknown subcommand `{command}`")));
    }
    let doc = document::parse(text)?;
    let verify = command == "verify";
    let tasks = doc
        .tasks
        .iter()
        .filter(|t| verify || t.spec.command() == command)
        .map(|t| run::run_task(t, timings))
        .collect::<Result<Vec<_>, _>>()?;
    let suite = if verify { suite::run(seed, timings) } else { Vec::new() };
    Ok(Report::new(command, seed, doc.digest, tasks, suite))
}
