//! `agrt`: forward projection, reconstruction, integrating factors and self-tests.
//!
//! Exit codes: 0 ok, 1 failed check, 2 I/O, 3 config or backend mismatch, 4 solver failure.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use agrt::inversion::I0Backend;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<agrt::Error> for CliError {
    fn from(e: agrt::Error) -> Self {
        use agrt::Error::*;
        let code = match &e {
            Io(_) | Format(_) | Csv(_) | Json(_) => 2,
            BackendMismatch(_) | InvalidMetric(_) | InvalidGrid(_) | HashMismatch { .. } => 3,
            ExitedDomain { .. }
            | TrapBudgetExceeded { .. }
            | OutsideDomain { .. }
            | SolverDiverged { .. }
            | MaxIterations { .. }
            | NeumannDiverged { .. } => 4,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "agrt", version, about = "Attenuated geodesic ray transform on simple discs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for all outputs. Created if missing.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads. Defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Grid override `nx,ntheta`.
    #[arg(long, value_parser = config::parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// I0 inversion backend override.
    #[arg(long)]
    pub backend: Option<I0Backend>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate attenuated data for the configured phantom.
    Forward {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct the source from a sinogram file (.bin or .csv).
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sinogram: PathBuf,
        /// Accept a sinogram whose config hash differs from the config.
        #[arg(long)]
        force: bool,
    },
    /// Compute both holomorphic integrating factors of the attenuation.
    Factors {
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in verification suite.
    Selftest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        /// Negative control: corrupt the Hilbert multiplier used by the spectral checks.
        #[arg(long, hide = true)]
        mutate_hilbert: bool,
    },
    /// Check the adjoint identity of the attenuated transform on random pairs.
    AdjointCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Forward { common }
        | Command::Reconstruct { common, .. }
        | Command::Factors { common }
        | Command::Selftest { common, .. }
        | Command::AdjointCheck { common, .. } => common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    std::fs::create_dir_all(&common.out_dir).map_err(|e| CliError::io(format!("{}: {e}", common.out_dir.display())))?;
    match &cli.command {
        Command::Forward { common } => commands::forward(common),
        Command::Reconstruct { common, sinogram, force } => commands::reconstruct(common, sinogram, *force),
        Command::Factors { common } => commands::factors(common),
        Command::Selftest { common, level, mutate_hilbert } => selftest::run(common, *level, *mutate_hilbert),
        Command::AdjointCheck { common, trials } => commands::adjoint_check(common, *trials),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
