//! `dtahe run` simulates aggregation periods, `dtahe cost` sweeps the
//! communication model, and `dtahe bench` times the scheme algorithms.

mod bench;
mod cost;
mod output;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("i/o: {e}"))
    }
}

impl From<dtahe::Error> for CliError {
    fn from(e: dtahe::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Lattice,
    Ec,
}

#[derive(Parser)]
#[command(name = "dtahe", version, about = "Threshold additive aggregation simulator and cost reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run aggregation periods between one server and simulated users.
    Run(run::RunArgs),
    /// Sweep per-user communication cost over a range of user counts.
    Cost(cost::CostArgs),
    /// Time Share, CombKey+Enc, Eval, ParDec and FinDec.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::run(&args),
        Command::Cost(args) => cost::run(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
