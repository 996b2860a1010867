//! `avalanche`: verify the composition identities, emit exact avalanche-size
//! laws, run seeded simulations and compare them with the exact laws.
//!
//! Exit status: 0 on success, 1 when a check fails (or on I/O errors), 2 for
//! usage and domain errors, 3 when an enumeration cap is exceeded.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use avalanche_core::{Error as CoreError, Limits};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "avalanche",
    version,
    about = "Exact and simulated avalanche-size distributions"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for relative --out paths.
    #[arg(long, env = "AVALANCHE_OUT_DIR", global = true)]
    pub out_dir: Option<PathBuf>,

    /// Significant digits for exact values in CSV output.
    #[arg(long, default_value_t = 17, global = true)]
    pub precision: usize,

    /// Largest vertex count for the tree census.
    #[arg(long, default_value_t = Limits::default().tree_vertices, global = true)]
    pub max_tree_vertices: usize,

    /// Largest state count for exhaustive urn and tower enumeration.
    #[arg(long, default_value_t = Limits::default().urn_assignments, global = true)]
    pub max_states: u64,

    /// Largest coordinate count for the heterogeneous partition sum.
    #[arg(long, default_value_t = Limits::default().general_coordinates, global = true)]
    pub max_coordinates: usize,
}

impl GlobalArgs {
    pub fn limits(&self) -> Limits {
        Limits {
            tree_vertices: self.max_tree_vertices,
            urn_assignments: self.max_states,
            tower_states: self.max_states,
            general_coordinates: self.max_coordinates,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the composition identity (or the forest form) and its induction invariant.
    Identity(commands::IdentityArgs),
    /// Census of labeled trees by BFS level profile.
    Trees(commands::TreesArgs),
    /// Emit an exact or limiting avalanche-size law.
    Pmf(commands::PmfArgs),
    /// Run a seeded urn or tower simulation.
    Simulate(commands::SimulateArgs),
    /// Tail log-ratios and log-log slope of the limit law.
    Tail(commands::TailArgs),
    /// Goodness of fit of a saved simulation against a saved PMF.
    Compare(commands::CompareArgs),
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Resource(_)) => 3,
        Some(CoreError::Domain(_) | CoreError::Degenerate(_)) => 2,
        None if err.downcast_ref::<commands::UsageError>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Identity(args) => commands::identity(args),
        Command::Trees(args) => commands::trees(args, &cli.global),
        Command::Pmf(args) => commands::pmf(args, &cli.global),
        Command::Simulate(args) => commands::simulate(args, &cli.global),
        Command::Tail(args) => commands::tail(args),
        Command::Compare(args) => commands::compare(args),
    };
    let result = outcome.and_then(|report| {
        output::emit(&report, &cli.global)?;
        Ok(report.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
