//! Front end for `wallcross-core`: argument grammar, rendering, and the
//! orchestrated verification suites behind `verify-all`.

pub mod commands;
pub mod config;
pub mod render;
pub mod suite;

use clap::Parser;
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] wallcross_core::Error),
    #[error("bound exceeded: {0}")]
    Bounds(String),
}

/// What one invocation prints and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// 0 on success, 1 when a check fails, 2 on bad input.
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(config: &RunConfig) -> Outcome {
    let result = config.validate().and_then(|()| commands::dispatch(&config.command, config.seed));
    match result {
        Ok(doc) => {
            let mut stdout = doc.render(config.format);
            if !stdout.ends_with('\n') {
                stdout.push('\n');
            }
            Outcome { code: if doc.passed == Some(false) { 1 } else { 0 }, stdout, stderr: String::new() }
        }
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// Parses `args` (including the program name) and runs. Usage errors exit 2;
/// `--help` and `--version` exit 0.
pub fn run_from_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            }
        }
    }
}
