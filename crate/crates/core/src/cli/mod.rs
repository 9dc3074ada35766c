//! Command-line front end: `solve`, `da-run` and `spectrum`, each driven by
//! a configuration file.
//!
//! Exit codes: `0` success, `1` configuration error, `2` solver breakdown or
//! non-SPD input, `3` method failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_da_run, cmd_solve, cmd_spectrum, output_dir, SPECTRUM_THETAS};
pub use config::{parse_methods, ConfigFile, ExperimentConfig, Scenario};

use crate::error::Error;

/// Environment variable overriding the output directory (the `--out` flag
/// takes precedence).
pub const OUT_DIR_ENV: &str = "SLMP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "slmp", version, about = "Scaled spectral preconditioners for sequences of SPD systems")]
pub struct Cli {
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one CG, PCG or deflated CG solve and write its trace.
    Solve { config: PathBuf },
    /// Run the Gauss-Newton method comparison on the Lorenz-96 problem.
    DaRun { config: PathBuf },
    /// Eigenvalues of the second-loop preconditioned operator per scaling.
    Spectrum { config: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 1,
    Breakdown = 2,
    MethodFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&Error> for ExitStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Argument(_)
            | Error::DimensionMismatch { .. }
            | Error::UnknownMethod(_)
            | Error::Covariance(_) => Self::ConfigError,
            Error::NotSpd(_) | Error::PreconditionerNotSpd { .. } => Self::Breakdown,
            _ => Self::MethodFailure,
        }
    }
}

/// Runs a parsed command line, printing diagnostics to stderr.
pub fn run(cli: Cli) -> ExitStatus {
    let out = cli.out.as_deref();
    let result = match &cli.command {
        Command::Solve { config } => cmd_solve(config, out),
        Command::DaRun { config } => cmd_da_run(config, out),
        Command::Spectrum { config } => cmd_spectrum(config, out),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::from(&e)
        }
    }
}
