//! Wall-clock timings of the scheme algorithms as one user or the server runs
//! them during a period.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::ecelgamal::{ec_unmask, EcParams};
use crate::error::{param, Result};
use crate::scheme::{EcScheme, Scheme, ShareBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Share,
    CombKeyEnc,
    Eval,
    ParDec,
    FinDec,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Share, Algorithm::CombKeyEnc, Algorithm::Eval, Algorithm::ParDec, Algorithm::FinDec];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Share => "share",
            Algorithm::CombKeyEnc => "combkey_enc",
            Algorithm::Eval => "eval",
            Algorithm::ParDec => "pardec",
            Algorithm::FinDec => "findec",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub n: usize,
    pub t: usize,
    pub reps: usize,
    pub data_bits: u32,
    pub alpha_bits: u32,
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(n: usize, t: usize, seed: u64) -> Self {
        Self { n, t, reps: 1, data_bits: 8, alpha_bits: 8, seed }
    }
}

/// Mean time of one call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub scheme: String,
    pub algorithm: String,
    pub n: usize,
    pub t: usize,
    pub dim: usize,
    pub reps: usize,
    /// Calls timed across all repetitions.
    pub samples: usize,
    pub mean_ms: f64,
}

#[derive(Default)]
struct Acc {
    total: Duration,
    samples: usize,
}

impl Acc {
    fn time<T>(&mut self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.total += start.elapsed();
        self.samples += 1;
        out
    }

    fn mean_ms(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.total.as_secs_f64() * 1e3 / self.samples as f64
    }
}

fn check_config(cfg: &BenchConfig) -> Result<()> {
    if cfg.t < 1 || cfg.t > cfg.n || cfg.reps == 0 {
        return Err(param(format!("bench needs n ≥ t ≥ 1 and reps > 0, got n={}, t={}, reps={}", cfg.n, cfg.t, cfg.reps)));
    }
    Ok(())
}

/// Times Share and CombKey+Enc per user, Eval once per repetition, ParDec per
/// user, and FinDec over `t` partials.
pub fn bench_scheme<S: Scheme>(scheme: &S, cfg: &BenchConfig) -> Result<Vec<Timing>> {
    check_config(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut acc: [Acc; 5] = Default::default();
    let dim = scheme.dim();
    let n = cfg.n as u32;
    for _ in 0..cfg.reps {
        let keys: Vec<S::KeyPair> = (0..n).map(|_| scheme.keygen(&mut rng)).collect();
        let publics: Vec<S::PublicKey> = keys.iter().map(|k| scheme.public_key(k)).collect();
        let mut inbox: Vec<Vec<ShareBundle>> = vec![Vec::new(); cfg.n];
        let mut retained = Vec::with_capacity(cfg.n);
        for u in 1..=n {
            let peers: Vec<_> =
                (1..=n).filter(|&v| v != u).map(|v| (v, scheme.transport_key(&publics[v as usize - 1]))).collect();
            let (bundles, kept) = acc[0].time(|| scheme.share(&keys[u as usize - 1], u, &peers, cfg.t, &mut rng))?;
            for b in bundles {
                inbox[b.recipient as usize - 1].push(b);
            }
            retained.push(kept);
        }

        let data: Vec<Vec<u64>> =
            (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0..1u64 << cfg.data_bits)).collect()).collect();
        let alphas: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << cfg.alpha_bits)).collect();
        let key_refs: Vec<&S::PublicKey> = publics.iter().collect();
        let mut cts = Vec::with_capacity(cfg.n);
        for m in &data {
            cts.push(acc[1].time(|| scheme.combine_keys(&key_refs).and_then(|pk| scheme.encrypt(&pk, m, &mut rng)))?);
        }

        let refs: Vec<&S::Ciphertext> = cts.iter().collect();
        let ct = acc[2].time(|| scheme.eval(&refs, &alphas))?;

        let mut partials = Vec::with_capacity(cfg.n);
        for u in 0..cfg.n {
            partials.push(acc[3].time(|| scheme.pardec(&ct, &keys[u], u as u32 + 1, &inbox[u], &retained[u]))?);
        }
        acc[4].time(|| scheme.findec(cfg.t, &ct, &partials[..cfg.t]))?;
    }
    Ok(Algorithm::ALL
        .iter()
        .zip(&acc)
        .map(|(alg, a)| Timing {
            scheme: scheme.kind().to_string(),
            algorithm: alg.to_string(),
            n: cfg.n,
            t: cfg.t,
            dim,
            reps: cfg.reps,
            samples: a.samples,
            mean_ms: a.mean_ms(),
        })
        .collect())
}

/// EC FinDec split into the Lagrange unmasking and the discrete-log search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinDecSplit {
    pub bound: u64,
    pub dim: usize,
    pub unmask_ms: f64,
    pub decode_ms: f64,
}

impl FinDecSplit {
    /// Fraction of FinDec spent in baby-step giant-step.
    pub fn decode_share(&self) -> f64 {
        let total = self.unmask_ms + self.decode_ms;
        if total == 0.0 {
            0.0
        } else {
            self.decode_ms / total
        }
    }
}

/// Times FinDec on aggregates drawn uniformly below `params.bound()`.
pub fn bench_ec_findec(params: EcParams, cfg: &BenchConfig) -> Result<FinDecSplit> {
    check_config(cfg)?;
    let bound = params.bound();
    let scheme = EcScheme::new(params);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let n = cfg.n as u32;
    let dim = scheme.dim();
    let per_user = (bound / cfg.n as u64).min(scheme.params.plain_modulus()).max(1);
    let (mut unmask, mut decode) = (Acc::default(), Acc::default());
    for _ in 0..cfg.reps {
        let keys: Vec<_> = (0..n).map(|_| scheme.keygen(&mut rng)).collect();
        let publics: Vec<_> = keys.iter().map(|k| scheme.public_key(k)).collect();
        let mut inbox: Vec<Vec<ShareBundle>> = vec![Vec::new(); cfg.n];
        let mut retained = Vec::new();
        for u in 1..=n {
            let peers: Vec<_> = (1..=n).filter(|&v| v != u).map(|v| (v, publics[v as usize - 1].transport)).collect();
            let (bundles, kept) = scheme.share(&keys[u as usize - 1], u, &peers, cfg.t, &mut rng)?;
            for b in bundles {
                inbox[b.recipient as usize - 1].push(b);
            }
            retained.push(kept);
        }
        let key_refs: Vec<_> = publics.iter().collect();
        let pk = scheme.combine_keys(&key_refs)?;
        let cts = (0..n)
            .map(|_| {
                let m: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..per_user)).collect();
                scheme.encrypt(&pk, &m, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = cts.iter().collect();
        let ct = scheme.eval(&refs, &vec![1; cfg.n])?;
        let partials = (0..cfg.t)
            .map(|u| scheme.pardec(&ct, &keys[u], u as u32 + 1, &inbox[u], &retained[u]))
            .collect::<Result<Vec<_>>>()?;
        let masks = unmask.time(|| ec_unmask(cfg.t, &ct, &partials))?;
        let table = scheme.params.table();
        decode.time(|| masks.iter().map(|p| table.decode(p, bound)).collect::<Result<Vec<_>>>())?;
    }
    Ok(FinDecSplit { bound, dim, unmask_ms: unmask.mean_ms(), decode_ms: decode.mean_ms() })
}
