use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use dtahe::bench::{bench_ec_findec, bench_scheme, BenchConfig, Timing};
use dtahe::ecelgamal::EcParams;
use dtahe::lattice::setup_default;
use dtahe::protocol::default_threshold;
use dtahe::scheme::{EcScheme, LatticeScheme};
use dtahe::seeds::SeedTree;

use crate::{output, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchScheme {
    Lattice,
    Ec,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchScheme::Both)]
    pub scheme: BenchScheme,
    #[arg(long, default_value_t = 5)]
    pub users: usize,
    /// Defaults to ⌈2n/3⌉.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// EC decode bound; defaults to the smallest power of two above the largest aggregate.
    #[arg(long)]
    pub bound: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &BenchArgs) -> Result<ExitCode, CliError> {
    let t = args.threshold.unwrap_or_else(|| default_threshold(args.users));
    if t < 1 || t > args.users || args.dim == 0 || args.reps == 0 {
        return Err(CliError::Usage(format!(
            "need users ≥ threshold ≥ 1 and positive dim and reps, got n={}, t={t}, dim={}, reps={}",
            args.users, args.dim, args.reps
        )));
    }
    let cfg = BenchConfig { reps: args.reps, ..BenchConfig::new(args.users, t, args.seed) };
    let seeds = SeedTree::new(args.seed);
    let mut rows: Vec<Timing> = Vec::new();

    if args.scheme != BenchScheme::Ec {
        let params = setup_default(args.dim, &mut seeds.child("setup").rng())?;
        rows.extend(bench_scheme(&LatticeScheme::new(params), &cfg)?);
    }
    if args.scheme != BenchScheme::Lattice {
        let largest = args.users as u64 * ((1 << cfg.data_bits) - 1) * ((1 << cfg.alpha_bits) - 1);
        let bound = args.bound.unwrap_or((largest + 1).next_power_of_two());
        if bound <= largest {
            return Err(CliError::Usage(format!("bound {bound} cannot hold aggregates up to {largest}")));
        }
        let table = (bound as f64).sqrt().ceil() as u64;
        let params = EcParams::new(args.dim, bound, bound, table)?;
        rows.extend(bench_scheme(&EcScheme::new(params.clone()), &cfg)?);
        let split = bench_ec_findec(params, &cfg)?;
        for (name, ms) in [("findec_unmask", split.unmask_ms), ("findec_bsgs", split.decode_ms)] {
            rows.push(Timing {
                scheme: "ec_elgamal".into(),
                algorithm: name.into(),
                n: args.users,
                t,
                dim: args.dim,
                reps: args.reps,
                samples: args.reps,
                mean_ms: ms,
            });
        }
        println!("ec findec at bound {bound}: {:.1}% in baby-step giant-step", 100.0 * split.decode_share());
    }

    output::prepare(&args.out)?;
    output::write_csv(&args.out, "bench.csv", &rows)?;
    output::write_json(&args.out, "bench.json", &rows)?;
    for r in &rows {
        println!("{:<11} {:<14} {:>12.3} ms", r.scheme, r.algorithm, r.mean_ms);
    }
    Ok(ExitCode::SUCCESS)
}
