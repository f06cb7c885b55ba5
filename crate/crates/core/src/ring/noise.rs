use num_bigint::BigUint;
use serde::Serialize;

use super::Params;
use crate::error::{param, Result};

/// Expansion-factor choice for the decryption-noise bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `δ_R = d`, the provable worst case for `x^d + 1`.
    WorstCase,
    /// `δ_R = ⌈√d⌉`, the central-limit estimate. Advisory only.
    Heuristic,
}

impl NoiseMode {
    pub fn expansion(self, degree: u64) -> u64 {
        match self {
            NoiseMode::WorstCase => degree,
            NoiseMode::Heuristic => {
                let r = degree.isqrt();
                if r * r == degree {
                    r
                } else {
                    r + 1
                }
            }
        }
    }
}

/// Outcome of checking `n·B·(1 + δ·A·(1 + 2δn)) < h/(2l)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoiseBoundReport {
    pub mode: NoiseMode,
    #[serde(serialize_with = "as_decimal")]
    pub bound: BigUint,
    /// `⌈h/(2l)⌉`; for integer bounds `bound < budget` iff `bound < h/(2l)` exactly.
    #[serde(serialize_with = "as_decimal")]
    pub budget: BigUint,
    pub satisfied: bool,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// `n·B·(1 + δ·A·(1 + 2δn))` with `δ` chosen by `mode`.
pub fn noise_bound(degree: u64, noise: u64, users: u64, max_coefficient: u64, mode: NoiseMode) -> BigUint {
    let delta = BigUint::from(mode.expansion(degree));
    let n = BigUint::from(users);
    let inner = BigUint::from(1u32) + 2u32 * &delta * &n;
    let outer = BigUint::from(1u32) + &delta * BigUint::from(max_coefficient) * inner;
    n * BigUint::from(noise) * outer
}

/// Validator over raw parameters, for configurations that are not full [`Params`].
pub fn check_noise_bound(
    degree: u64,
    modulus: u64,
    plain_modulus: u64,
    noise: u64,
    users: u64,
    max_coefficient: u64,
    mode: NoiseMode,
) -> Result<NoiseBoundReport> {
    if users == 0 {
        return Err(param("user count must be at least 1"));
    }
    if max_coefficient == 0 {
        return Err(param("coefficient bound A must be at least 1"));
    }
    if plain_modulus == 0 {
        return Err(param("plaintext modulus must be nonzero"));
    }
    let bound = noise_bound(degree, noise, users, max_coefficient, mode);
    let two_l = 2u128 * plain_modulus as u128;
    let budget = BigUint::from((modulus as u128).div_ceil(two_l));
    let satisfied = &bound * BigUint::from(two_l) < BigUint::from(modulus);
    debug_assert_eq!(satisfied, bound < budget);
    Ok(NoiseBoundReport { mode, bound, budget, satisfied })
}

/// Checks the correctness condition for `n` users and coefficients of norm at most `A`.
pub fn validate_noise_bound(params: &Params, users: u64, max_coefficient: u64, mode: NoiseMode) -> Result<NoiseBoundReport> {
    check_noise_bound(
        params.degree() as u64,
        params.modulus(),
        params.plain_modulus(),
        params.noise_bound() as u64,
        users,
        max_coefficient,
        mode,
    )
}
