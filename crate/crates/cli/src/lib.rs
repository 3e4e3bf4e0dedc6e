//! Command-line front end: parses arguments, runs one analysis and writes a
//! JSON report.

mod args;
mod commands;
mod input;
mod report;

use std::ffi::OsString;
use std::fs;

use anyhow::{Context, Result};
use clap::Parser;

pub use args::{Cli, Command};

/// Success, or a conclusion/check failure under `--strict`.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_CONCLUSION: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT_ERROR
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let (outcome, common) = match &cli.command {
        Command::Analyze(a) => (commands::analyze(a)?, &a.common),
        Command::Infer(a) => (commands::infer(a)?, &a.common),
        Command::CheckDag(a) => (commands::check_dag(a)?, &a.common),
        Command::Strings(a) => (commands::strings(a)?, &a.common),
        Command::Verify(a) => (commands::verify(a)?, &a.common),
    };
    let mut text = serde_json::to_string_pretty(&outcome.report.into_value())?;
    text.push('\n');
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(if common.strict && !outcome.ok { EXIT_NO_CONCLUSION } else { EXIT_OK })
}
