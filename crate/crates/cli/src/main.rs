//! `graud` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 identifiability failure,
//! 4 numerical failure.

mod args;
mod commands;
mod config;
mod report;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use graud::ErrorKind;

use args::{Cli, Command};
use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    Graud(graud::Error),
    Config(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Graud(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Assumption => 3,
                ErrorKind::Numerical => 4,
            },
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Graud(e) => e.code(),
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Graud(e) => write!(f, "{e}"),
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<graud::Error> for CliError {
    fn from(e: graud::Error) -> Self {
        CliError::Graud(e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Solve(a) => commands::solve_cmd(&file, a),
        Command::Check(a) => commands::check_cmd(&file, a),
        Command::Cv(a) => commands::cv_cmd(&file, a),
        Command::Simulate(a) => commands::simulate_cmd(&file, a),
        Command::Experiment(a) => commands::experiment_cmd(&file, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("graud: error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
