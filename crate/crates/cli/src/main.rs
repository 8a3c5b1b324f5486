mod check;
mod config;
mod diag;
mod eigs;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Common, PRange, Window};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Internal(String),
    #[error(transparent)]
    Core(#[from] pforms::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pforms::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Assertion(_) => 2,
            CliError::Internal(_) => 3,
            CliError::Core(e) => match e {
                E::SizeGuard { .. }
                | E::MassNotPositiveDefinite
                | E::SingularFacetSystem { .. }
                | E::SingularMap
                | E::EmptySpace(_)
                | E::EmptySamples => 3,
                _ => 1,
            },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pforms", version, about = "Discrete differential forms: spectra, checks and convergence diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zero-trace eigenvalue sweep over p with reference gaps.
    Eigs {
        #[command(flatten)]
        common: Common,
        /// Number of positive eigenvalues per row block.
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Spurious window relative to the first eigenvalue.
        #[arg(long, default_value = "1e-6,0.9")]
        window: Window,
    },
    /// Exact and floating-point structural checks.
    Check {
        #[arg(value_enum)]
        which: check::Which,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        extra: check::Extra,
    },
    /// Convergence diagnostics as `p,value` tables.
    Diag {
        #[arg(value_enum)]
        which: diag::Which,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        extra: diag::Extra,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eigs { common, count, window } => eigs::run(&common, count, window),
        Command::Check { which, common, extra } => check::run(which, &common, &extra),
        Command::Diag { which, common, extra } => diag::run(which, &common, &extra),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Breaches are reported always and fail the run only under `--assert`.
pub fn breach(common: &Common, failures: &[String]) -> Result<(), CliError> {
    for f in failures {
        eprintln!("FAIL {f}");
    }
    if common.assert && !failures.is_empty() {
        return Err(CliError::Assertion(format!("{} tolerance breach(es)", failures.len())));
    }
    Ok(())
}

pub const DEFAULT_P: PRange = PRange { lo: 1, hi: 4 };
