use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use dtahe::costmodel::{crossover, sweep, Calibration, Construction, CostParams, RingSize};

use crate::{output, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationArg {
    Scaled,
    Additive,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Constructions to report, comma-separated.
    #[arg(long = "scheme", value_delimiter = ',', value_parser = parse_construction,
          default_value = "pedersen,bd,bggjk1,bggjk2,ours")]
    pub schemes: Vec<Construction>,
    #[arg(long, default_value_t = 5)]
    pub min_users: u64,
    #[arg(long, default_value_t = 50)]
    pub max_users: u64,
    #[arg(long, default_value_t = 100_000)]
    pub dim: u64,
    #[arg(long, default_value_t = 2048)]
    pub degree: u64,
    #[arg(long, default_value_t = 54)]
    pub modulus_bits: u64,
    /// BGGJK-2 modulus growth model.
    #[arg(long, value_enum, default_value_t = CalibrationArg::Scaled)]
    pub calibration: CalibrationArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_construction(s: &str) -> Result<Construction, String> {
    s.parse().map_err(|e: dtahe::Error| e.to_string())
}

pub fn run(args: &CostArgs) -> Result<ExitCode, CliError> {
    if args.min_users < 2 || args.min_users > args.max_users {
        return Err(CliError::Usage(format!("need 2 ≤ min-users ≤ max-users, got {}..{}", args.min_users, args.max_users)));
    }
    let calibration = match args.calibration {
        CalibrationArg::Scaled => Calibration::Scaled,
        CalibrationArg::Additive => Calibration::Additive,
    };
    let params = CostParams {
        ring: RingSize { degree: args.degree, modulus_bits: args.modulus_bits },
        calibration,
        ..CostParams::default()
    };
    let ns = args.min_users..=args.max_users;
    let rows = sweep(&args.schemes, ns.clone(), args.dim, &params);

    output::prepare(&args.out)?;
    output::write_csv(&args.out, "cost.csv", &rows)?;
    output::write_json(&args.out, "cost.json", &rows)?;

    let unsupported = rows.iter().filter(|r| r.status != "ok").count();
    println!("{} rows written to {}", rows.len(), args.out.display());
    if unsupported > 0 {
        println!("{unsupported} rows unsupported");
    }
    if args.schemes.contains(&Construction::Ours) && args.schemes.contains(&Construction::Bggjk2) {
        match crossover(ns, args.dim, &params) {
            Some(n) => println!("ours cheaper than bggjk2 (calibrated_{calibration}) from n = {n}"),
            None => println!("ours never cheaper than bggjk2 (calibrated_{calibration}) in range"),
        }
    }
    Ok(ExitCode::SUCCESS)
}
