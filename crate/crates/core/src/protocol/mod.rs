//! Four-round aggregation between one server and many clients, in a basic
//! variant that trusts the server and a secure variant that binds the server
//! to its evaluation through the deposit contract.
//!
//! Each period runs AdvertiseKeys, ShareKeys, CipherCollection, and Decryption.
//! Parties are synchronous state machines; the [`driver`] moves encoded
//! messages between them over a [`transport::SimNet`] and produces blocks.

mod client;
pub mod driver;
mod message;
mod server;
pub mod transport;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use client::{CipherSubmission, Client, ClientStatus, SecureIdentity};
pub use driver::{plaintext_oracle, Deployment, PeriodInputs, PeriodOutcome, PeriodResult};
pub use message::{Advert, AdvertBody, RoundMessage};
pub use server::{session_id, CheckSubmission, PeriodState, Server, ServerIdentity};

use crate::chain::DEFAULT_MIN_VALUE;
use crate::error::{param, Result};
use crate::scheme::SchemeKind;

/// Default clock tolerance for signed timestamps, in simulated seconds.
pub const DEFAULT_FRESHNESS_WINDOW: u64 = 120;
/// Default number of inbound messages the server processes per round.
pub const DEFAULT_ROUND_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Basic,
    Secure,
}

/// How many arrivals the server needs before answering rounds 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RosterGate {
    /// Strictly more than `t`.
    Strict,
    /// At least `t`, matching the client-side checks.
    Inclusive,
}

impl RosterGate {
    pub fn admits(self, have: usize, t: usize) -> bool {
        match self {
            RosterGate::Strict => have > t,
            RosterGate::Inclusive => have >= t,
        }
    }

    pub fn needed(self, t: usize) -> usize {
        match self {
            RosterGate::Strict => t + 1,
            RosterGate::Inclusive => t,
        }
    }
}

/// Scripted server misbehavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attack {
    None,
    /// Check over `t − 1` accounts whose evaluation is one user's ciphertext.
    SubstituteCipher,
    /// An honest check on chain plus a conflicting one sent privately to a user.
    DuplicateEsid,
}

/// Users who stop responding at each round (1 to 4), applied every period.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropoutSchedule {
    pub rounds: BTreeMap<u8, BTreeSet<u32>>,
}

impl DropoutSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn drop_at(mut self, round: u8, users: impl IntoIterator<Item = u32>) -> Self {
        self.rounds.entry(round).or_default().extend(users);
        self
    }

    /// Whether `user` is offline when round `round` starts.
    pub fn is_dropped(&self, user: u32, round: u8) -> bool {
        self.rounds.range(..=round).any(|(_, users)| users.contains(&user))
    }

    /// Round at which `user` drops, if any.
    pub fn drop_round(&self, user: u32) -> Option<u8> {
        self.rounds.iter().find(|(_, users)| users.contains(&user)).map(|(&r, _)| r)
    }
}

/// Minimums a client requires of the contract before joining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientPolicy {
    pub min_deposit: u64,
    pub min_periods: u32,
    pub min_threshold: usize,
}

impl Default for ClientPolicy {
    fn default() -> Self {
        Self { min_deposit: DEFAULT_MIN_VALUE, min_periods: 1, min_threshold: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub t: usize,
    pub n_target: usize,
    /// Minimum number of honest inputs in any aggregate.
    pub lambda_m: usize,
    /// Assumed bound on corrupted users per period.
    pub n_c: usize,
    pub dim: usize,
    pub scheme: SchemeKind,
    pub variant: Variant,
    pub periods: u32,
    pub dropouts: DropoutSchedule,
    pub freshness_window: u64,
    pub round_budget: usize,
    pub roster_gate: RosterGate,
    pub min_value: u64,
    pub policy: ClientPolicy,
    pub attack: Attack,
}

/// `⌈2n/3⌉`.
pub fn default_threshold(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

impl ProtocolConfig {
    /// Defaults: `n_c = ⌊(n−1)/3⌋`, `λ_m = t − n_c`, one period, no dropouts.
    pub fn new(n_target: usize, t: usize, dim: usize, scheme: SchemeKind, variant: Variant) -> Self {
        let n_c = n_target.saturating_sub(1) / 3;
        Self {
            t,
            n_target,
            lambda_m: t.saturating_sub(n_c),
            n_c,
            dim,
            scheme,
            variant,
            periods: 1,
            dropouts: DropoutSchedule::none(),
            freshness_window: DEFAULT_FRESHNESS_WINDOW,
            round_budget: DEFAULT_ROUND_BUDGET,
            roster_gate: RosterGate::Inclusive,
            min_value: DEFAULT_MIN_VALUE,
            policy: ClientPolicy::default(),
            attack: Attack::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 2 {
            return Err(param(format!("threshold {} below 2", self.t)));
        }
        if self.t > self.n_target {
            return Err(param(format!("threshold {} exceeds {} users", self.t, self.n_target)));
        }
        if self.lambda_m + self.n_c < self.t {
            return Err(param(format!(
                "minimum honest inputs {} below t - n_c = {}",
                self.lambda_m,
                self.t - self.n_c
            )));
        }
        if self.dim == 0 {
            return Err(param("dimension must be positive"));
        }
        if self.periods == 0 {
            return Err(param("at least one period is required"));
        }
        if self.round_budget == 0 {
            return Err(param("round budget must be positive"));
        }
        for (&round, users) in &self.dropouts.rounds {
            if !(1..=4).contains(&round) {
                return Err(param(format!("dropout round {round} outside 1..=4")));
            }
            if let Some(u) = users.iter().find(|&&u| u == 0 || u as usize > self.n_target) {
                return Err(param(format!("dropout user {u} outside 1..={}", self.n_target)));
            }
        }
        if self.attack != Attack::None && self.variant != Variant::Secure {
            return Err(param("attack fixtures require the secure variant"));
        }
        Ok(())
    }
}

/// Why a period ended without an aggregate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    Threshold { needed: usize, have: usize },
    Decryption { detail: String },
    Chain { detail: String },
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::Threshold { needed, have } => write!(f, "threshold not met: need {needed}, have {have}"),
            AbortReason::Decryption { detail } => write!(f, "decryption failed: {detail}"),
            AbortReason::Chain { detail } => write!(f, "chain failure: {detail}"),
        }
    }
}
