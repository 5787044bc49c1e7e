//! `hgreen`: command-line front end for the hgreen library.
//!
//! Exit status: 0 on success, 1 when a check fails or the input is
//! mathematically invalid (bad pole, failing matrices), 2 on usage and
//! parse errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    CheckFailed,
}

impl From<hgreen::Error> for CliError {
    fn from(e: hgreen::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "hgreen", version, about = "Green functions on prototype H-type groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON payload for the subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (CSV for eval, trace and solve; JSON otherwise)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized suite
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Group JSON, overriding any "group" field of the payload
    #[arg(long, global = true)]
    group: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the matrices of a group
    Validate,
    /// Fix the normalization of Gamma by unit flux
    Calibrate,
    /// Tabulate Gamma or a Green function on points
    Eval,
    /// Sample a Green function on the boundary of its domain
    Trace,
    /// Evaluate the Dirichlet representation formula
    Solve,
    /// Run the property suite
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = commands::Options { config: cli.config, out: cli.out, seed: cli.seed, group: cli.group };
    let result = match cli.command {
        Command::Validate => commands::validate(&opts),
        Command::Calibrate => commands::calibrate(&opts),
        Command::Eval => commands::eval(&opts),
        Command::Trace => commands::trace(&opts),
        Command::Solve => commands::solve_cmd(&opts),
        Command::Verify => commands::verify(&opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::CheckFailed) => ExitCode::from(1),
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
