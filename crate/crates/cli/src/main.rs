//! `tfim`: ground-state sweeps, scaling analysis, oracle checks and figure
//! exports for the transverse-field Ising model.
//!
//! Exit codes:
//!
//! | code | meaning                                         |
//! |------|-------------------------------------------------|
//! | 0    | success                                         |
//! | 1    | a verification check failed                     |
//! | 2    | invalid config or missing input runs            |
//! | 3    | resource gate: the lattice does not fit memory  |
//! | 4    | eigensolver failure                             |
//! | 5    | scaling analysis failure                        |
//! | 6    | output could not be written                     |

mod commands;
mod config;
mod error;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "tfim", version, about = "Transverse-field Ising exact diagonalization pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a λ grid, differentiate E_gl and locate its peak.
    Sweep(CommonArgs),
    /// Finite-size scaling over completed sweeps.
    Fss(CommonArgs),
    /// Run the oracle and invariant checks.
    Verify(CommonArgs),
    /// Write plot-ready figure tables from completed sweeps.
    Export(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// Upper bound on concurrent solves.
    #[arg(long)]
    workers: Option<usize>,
    /// Sweep cache directory; overrides the environment and the config.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn init_logging() {
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"));
    tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_current_span(false)
        .init();
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let (args, run): (CommonArgs, fn(&config::LoadedConfig, &Overrides) -> Result<(), CliError>) = match command {
        Command::Sweep(a) => (a, commands::sweep::run),
        Command::Fss(a) => (a, |c, _| commands::fss::run(c)),
        Command::Verify(a) => (a, |c, _| commands::verify::run(c)),
        Command::Export(a) => (a, |c, _| commands::export::run(c)),
    };
    let cfg = config::load(&args.config)?;
    let overrides = Overrides {
        workers: args.workers,
        cache_dir: args.cache_dir,
    };
    tracing::info!(config = %args.config.display(), hash = %cfg.hash, "config loaded");
    run(&cfg, &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::from(error::exit::OK),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
