use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{AccountId, Call, CheckCall, Esid, EventKind, Transaction, WITHDRAWAL_DELAY};
use crate::error::Result;
use crate::scheme::Scheme;

/// Re-runs the homomorphic evaluation over encoded ciphertexts.
pub trait EvalVerifier: Send + Sync {
    fn recompute(&self, ciphers: &[&[u8]], alphas: &[u64]) -> Result<Vec<u8>>;
}

impl<S: Scheme> EvalVerifier for S {
    fn recompute(&self, ciphers: &[&[u8]], alphas: &[u64]) -> Result<Vec<u8>> {
        let decoded = ciphers.iter().map(|c| self.decode_ciphertext(c)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = decoded.iter().collect();
        Ok(self.encode_ciphertext(&self.eval(&refs, alphas)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SlashReason {
    BelowThreshold { have: usize, needed: usize },
    EvalMismatch,
    Malformed,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    Slash(SlashReason),
}

impl Verdict {
    pub fn is_slash(&self) -> bool {
        matches!(self, Verdict::Slash(_))
    }
}

/// The first check accepted under an esid, plus digests of later conflicting ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckEntry {
    pub digest: [u8; 32],
    pub verdict: Verdict,
    pub height: u64,
    pub accepted: Vec<AccountId>,
    pub conflicts: Vec<[u8; 32]>,
}

pub(super) struct Effects {
    pub transfers: Vec<(AccountId, i64)>,
    pub events: Vec<EventKind>,
}

/// Deposit escrow that records period ciphertexts and re-verifies the server's evaluation.
pub struct Contract {
    id: AccountId,
    owner: AccountId,
    min_value: u64,
    t: u32,
    dep: u64,
    prds: u32,
    initialized: bool,
    terminated: bool,
    withdrawal: Option<u64>,
    records: BTreeMap<Esid, BTreeMap<AccountId, Vec<u8>>>,
    checks: BTreeMap<Esid, CheckEntry>,
    verifier: Arc<dyn EvalVerifier>,
}

impl Contract {
    pub(super) fn new(id: AccountId, owner: AccountId, min_value: u64, verifier: Arc<dyn EvalVerifier>) -> Self {
        Self {
            id,
            owner,
            min_value,
            t: 0,
            dep: 0,
            prds: 0,
            initialized: false,
            terminated: false,
            withdrawal: None,
            records: BTreeMap::new(),
            checks: BTreeMap::new(),
            verifier,
        }
    }

    pub fn id(&self) -> AccountId {
        self.id
    }

    pub fn owner(&self) -> AccountId {
        self.owner
    }

    pub fn min_value(&self) -> u64 {
        self.min_value
    }

    pub fn threshold(&self) -> u32 {
        self.t
    }

    pub fn dep(&self) -> u64 {
        self.dep
    }

    pub fn prds(&self) -> u32 {
        self.prds
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Height at which the deposit will be paid out, if a draw was accepted.
    pub fn withdrawal_due_at(&self) -> Option<u64> {
        self.withdrawal.map(|h| h + WITHDRAWAL_DELAY)
    }

    pub fn records(&self, esid: &Esid) -> Option<&BTreeMap<AccountId, Vec<u8>>> {
        self.records.get(esid)
    }

    pub fn check(&self, esid: &Esid) -> Option<&CheckEntry> {
        self.checks.get(esid)
    }

    pub(super) fn withdrawal_due(&self, height: u64) -> bool {
        !self.terminated && self.withdrawal_due_at().is_some_and(|due| height >= due)
    }

    pub(super) fn pay_out(&mut self) -> (AccountId, u64) {
        let amount = std::mem::take(&mut self.dep);
        self.terminated = true;
        (self.owner, amount)
    }

    pub(super) fn execute(&mut self, tx: &Transaction, call: Call, height: u64) -> std::result::Result<Effects, String> {
        if self.terminated {
            return Err(format!("contract {} has terminated", self.id));
        }
        let mut fx = Effects { transfers: Vec::new(), events: Vec::new() };
        match call {
            Call::Init { t, prds } => {
                if tx.from != self.owner {
                    return Err("only the owner may initialize".into());
                }
                let required = self.min_value.checked_mul(prds as u64).ok_or("deposit requirement overflows")?;
                let offered = self.dep.checked_add(tx.value).ok_or("deposit overflows")?;
                if offered < required {
                    return Err(format!("deposit {offered} below required {required}"));
                }
                self.dep = offered;
                self.t = t;
                self.prds = prds;
                self.initialized = true;
                fx.transfers.push((tx.from, -(tx.value as i64)));
                fx.events.push(EventKind::Initialized { contract: self.id, value: tx.value, dep: self.dep, prds });
            }
            Call::Record { esid, cipher } => {
                if !self.initialized {
                    return Err("contract not initialized".into());
                }
                let slot = self.records.entry(esid).or_default();
                let kind = if let std::collections::btree_map::Entry::Vacant(e) = slot.entry(tx.from) {
                    e.insert(cipher);
                    EventKind::Recorded { contract: self.id, account: tx.from, esid: hex::encode(esid) }
                } else {
                    EventKind::RecordIgnored { contract: self.id, account: tx.from, esid: hex::encode(esid) }
                };
                fx.events.push(kind);
            }
            Call::Check(check) => {
                if tx.from != self.owner {
                    return Err("only the owner may submit checks".into());
                }
                if !self.initialized {
                    return Err("contract not initialized".into());
                }
                self.check_call(tx.digest(), check, height, &mut fx);
            }
            Call::PublishKey { .. } => return Err("key publication is not a contract call".into()),
        }
        Ok(fx)
    }

    fn check_call(&mut self, digest: [u8; 32], call: CheckCall, height: u64, fx: &mut Effects) {
        let esid_hex = hex::encode(call.esid);
        if let Some(entry) = self.checks.get_mut(&call.esid) {
            if entry.digest == digest || entry.conflicts.contains(&digest) {
                fx.events.push(EventKind::CheckReplayed { contract: self.id, esid: esid_hex });
                return;
            }
            entry.conflicts.push(digest);
            let recorded: Vec<AccountId> =
                self.records.get(&call.esid).map(|r| r.keys().copied().collect()).unwrap_or_default();
            fx.events.push(EventKind::Verdict {
                contract: self.id,
                esid: esid_hex.clone(),
                verdict: Verdict::Slash(SlashReason::Conflict),
            });
            self.slash(&call.esid, &recorded, fx);
            return;
        }

        let records = self.records.get(&call.esid);
        let mut accepted = Vec::new();
        let mut ciphers: Vec<&[u8]> = Vec::new();
        let mut alphas = Vec::new();
        let mut seen = BTreeSet::new();
        let malformed = call.accounts.len() != call.alphas.len() || !call.accounts.iter().all(|a| seen.insert(*a));
        if !malformed {
            for (acc, &alpha) in call.accounts.iter().zip(&call.alphas) {
                if let Some(c) = records.and_then(|r| r.get(acc)) {
                    accepted.push(*acc);
                    ciphers.push(c);
                    alphas.push(alpha);
                }
            }
        }
        let verdict = if malformed {
            Verdict::Slash(SlashReason::Malformed)
        } else if accepted.len() < self.t as usize {
            Verdict::Slash(SlashReason::BelowThreshold { have: accepted.len(), needed: self.t as usize })
        } else {
            match self.verifier.recompute(&ciphers, &alphas) {
                Ok(bytes) if bytes == call.cipher => Verdict::Ok,
                _ => Verdict::Slash(SlashReason::EvalMismatch),
            }
        };
        self.checks.insert(
            call.esid,
            CheckEntry { digest, verdict, height, accepted: accepted.clone(), conflicts: Vec::new() },
        );
        fx.events.push(EventKind::Verdict { contract: self.id, esid: esid_hex, verdict });
        match verdict {
            Verdict::Ok => {
                self.prds = self.prds.saturating_sub(1);
                if call.draw && self.withdrawal.is_none() {
                    self.withdrawal = Some(height);
                    fx.events.push(EventKind::WithdrawalScheduled { contract: self.id, due: height + WITHDRAWAL_DELAY });
                }
            }
            Verdict::Slash(_) => self.slash(&call.esid, &accepted, fx),
        }
    }

    /// Moves up to `MinValue` out of the deposit, split equally with the
    /// remainder going to the lowest account id.
    fn slash(&mut self, esid: &Esid, recipients: &[AccountId], fx: &mut Effects) {
        let mut recipients = recipients.to_vec();
        recipients.sort();
        recipients.dedup();
        let amount = if recipients.is_empty() { 0 } else { self.min_value.min(self.dep) };
        let mut payouts = Vec::new();
        if amount > 0 {
            let k = recipients.len() as u64;
            let (each, rem) = (amount / k, amount % k);
            for (i, &acc) in recipients.iter().enumerate() {
                let share = each + if i == 0 { rem } else { 0 };
                payouts.push((acc, share));
                fx.transfers.push((acc, share as i64));
            }
            self.dep -= amount;
        }
        fx.events.push(EventKind::Slashed { contract: self.id, esid: hex::encode(esid), amount, payouts });
    }

    pub(super) fn dump(&self) -> ContractDump {
        ContractDump {
            owner: self.owner,
            min_value: self.min_value,
            t: self.t,
            dep: self.dep,
            prds: self.prds,
            initialized: self.initialized,
            terminated: self.terminated,
            withdrawal_due: self.withdrawal_due_at(),
            records: self
                .records
                .iter()
                .map(|(e, r)| {
                    (hex::encode(e), r.iter().map(|(&a, c)| (a, hex::encode(Sha256::digest(c)))).collect())
                })
                .collect(),
            checks: self
                .checks
                .iter()
                .map(|(e, c)| {
                    (
                        hex::encode(e),
                        CheckDump {
                            digest: hex::encode(c.digest),
                            verdict: c.verdict,
                            height: c.height,
                            accepted: c.accepted.clone(),
                            conflicts: c.conflicts.iter().map(hex::encode).collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractDump {
    pub owner: AccountId,
    pub min_value: u64,
    pub t: u32,
    pub dep: u64,
    pub prds: u32,
    pub initialized: bool,
    pub terminated: bool,
    pub withdrawal_due: Option<u64>,
    pub records: BTreeMap<String, Vec<(AccountId, String)>>,
    pub checks: BTreeMap<String, CheckDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckDump {
    pub digest: String,
    pub verdict: Verdict,
    pub height: u64,
    pub accepted: Vec<AccountId>,
    pub conflicts: Vec<String>,
}
