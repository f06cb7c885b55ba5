use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use dtahe::costmodel::{measured_vs_model, WireModel};
use dtahe::ecelgamal::EcParams;
use dtahe::lattice::setup_default;
use dtahe::protocol::{
    default_threshold, Attack, Deployment, DropoutSchedule, PeriodOutcome, PeriodResult, ProtocolConfig, Variant,
};
use dtahe::scheme::{EcScheme, LatticeScheme, Scheme, SchemeKind};
use dtahe::seeds::SeedTree;
use rand::seq::SliceRandom;

use crate::{output, CliError, SchemeArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Basic,
    Secure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    None,
    SubstituteCipher,
    DuplicateEsid,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Lattice)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Basic)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 5)]
    pub users: usize,
    /// Defaults to ⌈2n/3⌉.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub periods: u32,
    /// `round:count` pairs; victims are drawn from the seed and drop in every period.
    #[arg(long, value_delimiter = ',', value_parser = parse_dropout)]
    pub dropout: Vec<(u8, usize)>,
    #[arg(long, value_enum, default_value_t = AttackArg::None)]
    pub attack: AttackArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_dropout(s: &str) -> Result<(u8, usize), String> {
    let (round, count) = s.split_once(':').ok_or_else(|| format!("expected round:count, got {s:?}"))?;
    let round = round.trim().parse().map_err(|_| format!("bad round in {s:?}"))?;
    let count = count.trim().parse().map_err(|_| format!("bad count in {s:?}"))?;
    Ok((round, count))
}

/// Draws `count` fresh victims per entry, in the order given.
fn dropout_schedule(n: usize, drops: &[(u8, usize)], seeds: &SeedTree) -> Result<DropoutSchedule, CliError> {
    let mut rng = seeds.child("dropout").rng();
    let mut pool: Vec<u32> = (1..=n as u32).collect();
    let mut schedule = DropoutSchedule::none();
    for &(round, count) in drops {
        if count > pool.len() {
            return Err(CliError::Usage(format!("cannot drop {count} more users at round {round}")));
        }
        let victims: Vec<u32> = pool.choose_multiple(&mut rng, count).copied().collect();
        pool.retain(|u| !victims.contains(u));
        schedule = schedule.drop_at(round, victims);
    }
    Ok(schedule)
}

pub fn config(args: &RunArgs) -> Result<ProtocolConfig, CliError> {
    let kind = match args.scheme {
        SchemeArg::Lattice => SchemeKind::Lattice,
        SchemeArg::Ec => SchemeKind::EcElgamal,
    };
    let variant = match args.variant {
        VariantArg::Basic => Variant::Basic,
        VariantArg::Secure => Variant::Secure,
    };
    let t = args.threshold.unwrap_or_else(|| default_threshold(args.users));
    let mut config = ProtocolConfig::new(args.users, t, args.dim, kind, variant);
    config.periods = args.periods;
    config.attack = match args.attack {
        AttackArg::None => Attack::None,
        AttackArg::SubstituteCipher => Attack::SubstituteCipher,
        AttackArg::DuplicateEsid => Attack::DuplicateEsid,
    };
    config.dropouts = dropout_schedule(args.users, &args.dropout, &SeedTree::new(args.seed))?;
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

pub fn run(args: &RunArgs) -> Result<ExitCode, CliError> {
    let config = config(args)?;
    let seeds = SeedTree::new(args.seed);
    match config.scheme {
        SchemeKind::Lattice => {
            let params = setup_default(args.dim, &mut seeds.child("setup").rng())?;
            let degree = params.degree() as u64;
            execute(args, config, LatticeScheme::new(params), degree)
        }
        SchemeKind::EcElgamal => execute(args, config, EcScheme::new(EcParams::with_defaults(args.dim)?), 0),
    }
}

fn summary(o: &PeriodOutcome) -> String {
    let mut line = match &o.result {
        PeriodResult::Aggregate { values } => {
            format!("period {}: aggregate over {} users, {} values", o.period, o.rosters[2].len(), values.len())
        }
        PeriodResult::Aborted { round, reason } => format!("period {}: aborted in round {round}: {reason}", o.period),
    };
    if o.slashed() {
        line.push_str(" [SLASH]");
    }
    line
}

fn execute<S: Scheme + Clone>(args: &RunArgs, config: ProtocolConfig, scheme: S, degree: u64) -> Result<ExitCode, CliError> {
    let attack = config.attack;
    let kind = config.scheme;
    let mut deployment = Deployment::new(config, scheme, args.seed)?;
    let outcomes = deployment.run()?;

    output::prepare(&args.out)?;
    output::write_text(&args.out, "transcript.jsonl", &deployment.transcript().to_jsonl())?;
    let aggregates: Vec<Option<&[u64]>> = outcomes.iter().map(PeriodOutcome::aggregate).collect();
    let compact = serde_json::to_string(&aggregates).map_err(|e| CliError::Failed(e.to_string()))?;
    output::write_text(&args.out, "aggregate.json", &(compact + "\n"))?;
    output::write_json(&args.out, "outcomes.json", &outcomes)?;
    let model = WireModel { scheme: kind, degree, dim: args.dim as u64 };
    output::write_json(&args.out, "sizes.json", &measured_vs_model(deployment.transcript(), &model))?;
    if let Some(chain) = deployment.chain() {
        let mut dump = chain.dump().to_json();
        dump.push('\n');
        output::write_text(&args.out, "chain.json", &dump)?;
    }

    for o in &outcomes {
        println!("{}", summary(o));
    }
    let slashed = outcomes.iter().any(PeriodOutcome::slashed);
    let aborted = outcomes.iter().any(|o| o.aggregate().is_none());
    let ok = match attack {
        Attack::None => !slashed && !aborted,
        Attack::SubstituteCipher | Attack::DuplicateEsid => slashed,
    };
    if attack != Attack::None {
        let name = args.attack.to_possible_value().expect("no skipped variants");
        let verdict = if slashed { "caught, deposit slashed" } else { "not caught" };
        println!("attack {}: {verdict}", name.get_name());
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
