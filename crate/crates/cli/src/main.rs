mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{FigureId, SweepArgs};
use config::RunConfig;

const THREADS_VAR: &str = "ADIABATIC_CHAIN_THREADS";

/// Adiabatic state transfer through a gate-driven chain of quantum dots.
#[derive(Debug, Parser)]
#[command(
    name = "adiabatic-chain",
    version,
    after_help = "Energies are in units of J and times in units of 1/J (hbar = 1).\n\
                  Exit codes: 0 success, 1 computation failure, 2 invalid input, 3 I/O failure.\n\
                  ADIABATIC_CHAIN_THREADS caps sweep parallelism (0 or unset = all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate from site 1 and write the population trace plus a JSON summary
    Evolve(Common),
    /// Print the minimum gap and its time as JSON
    Gap(Common),
    /// Regenerate a figure's data set
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        #[command(flatten)]
        common: Common,
    },
    /// Vary one parameter and record fidelity or minimum gap
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Flat JSON config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => Ok(RunConfig::load(path)?.overlay(self.run)),
            None => Ok(self.run),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Runtime(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<adiabatic_chain::Error> for CliError {
    fn from(e: adiabatic_chain::Error) -> Self {
        use adiabatic_chain::Error as E;
        match e {
            E::InvalidChain(_)
            | E::InvalidSchedule(_)
            | E::InvalidDisorder(_)
            | E::InvalidArgument(_)
            | E::NotBound { .. }
            | E::Unnormalized { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Validation(format!(
            "{THREADS_VAR} must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Evolve(common) => commands::evolve(&common.resolve()?),
        Command::Gap(common) => commands::gap(&common.resolve()?),
        Command::Figure { id, common } => commands::figure(id, &common.resolve()?),
        Command::Sweep { sweep, common } => commands::sweep(&sweep, &common.resolve()?),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adiabatic-chain: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
