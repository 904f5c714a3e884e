mod args;
mod config;
mod csv;
mod run;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] geon_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} points failed; see the status column")]
    Points { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Compute(geon_core::Error::Domain(_)) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geon: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
