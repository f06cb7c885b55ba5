//! A single-node ledger with signed transactions, driver-stepped blocks, and
//! the aggregation contract that escrows the server's deposit.

mod contract;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use contract::{CheckEntry, Contract, EvalVerifier, SlashReason, Verdict};

use crate::crypto::{sig_sign, sig_verify, SignKey, VerifyKey, SIGNATURE_LEN};
use crate::error::{format, Error, Result};
use crate::wire::{Reader, Writer};

/// Per-period stake slashed on a failed check.
pub const DEFAULT_MIN_VALUE: u64 = 10;
/// Blocks between a draw request and the deposit payout.
pub const WITHDRAWAL_DELAY: u64 = 6;

/// Session identifier binding one period's records and check.
pub type Esid = [u8; 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AccountId(pub u32);

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acc{}", self.0)
    }
}

/// Arguments of a server check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckCall {
    pub draw: bool,
    pub esid: Esid,
    pub cipher: Vec<u8>,
    pub accounts: Vec<AccountId>,
    pub alphas: Vec<u64>,
}

/// Decoded transaction payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Call {
    PublishKey { key: Vec<u8> },
    Init { t: u32, prds: u32 },
    Record { esid: Esid, cipher: Vec<u8> },
    Check(CheckCall),
}

impl Call {
    pub fn name(&self) -> &'static str {
        match self {
            Call::PublishKey { .. } => "PublishKey",
            Call::Init { .. } => "Init",
            Call::Record { .. } => "Record",
            Call::Check(_) => "Check",
        }
    }

    /// Function name ‖ argument count ‖ length-prefixed argument blobs.
    pub fn encode(&self) -> Vec<u8> {
        let args: Vec<Vec<u8>> = match self {
            Call::PublishKey { key } => vec![key.clone()],
            Call::Init { t, prds } => vec![t.to_le_bytes().to_vec(), prds.to_le_bytes().to_vec()],
            Call::Record { esid, cipher } => vec![esid.to_vec(), cipher.clone()],
            Call::Check(c) => {
                let mut acc = Writer::new();
                acc.u32(c.accounts.len() as u32);
                for a in &c.accounts {
                    acc.u32(a.0);
                }
                let mut al = Writer::new();
                al.u32(c.alphas.len() as u32);
                for &a in &c.alphas {
                    al.u64(a);
                }
                vec![vec![c.draw as u8], c.esid.to_vec(), c.cipher.clone(), acc.finish(), al.finish()]
            }
        };
        let mut w = Writer::new();
        w.blob(self.name().as_bytes()).u32(args.len() as u32);
        for a in &args {
            w.blob(a);
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let name = r.blob()?.to_vec();
        let argc = r.u32()? as usize;
        let mut args = Vec::with_capacity(argc.min(8));
        for _ in 0..argc {
            args.push(r.blob()?);
        }
        r.finish()?;
        let want = |n: usize| if args.len() == n { Ok(()) } else { Err(format("wrong argument count")) };
        let esid = |b: &[u8]| -> Result<Esid> { b.try_into().map_err(|_| format("esid must be 16 bytes")) };
        let word = |b: &[u8]| -> Result<u32> {
            Ok(u32::from_le_bytes(b.try_into().map_err(|_| format("expected a 4-byte integer"))?))
        };
        match name.as_slice() {
            b"PublishKey" => {
                want(1)?;
                Ok(Call::PublishKey { key: args[0].to_vec() })
            }
            b"Init" => {
                want(2)?;
                Ok(Call::Init { t: word(args[0])?, prds: word(args[1])? })
            }
            b"Record" => {
                want(2)?;
                Ok(Call::Record { esid: esid(args[0])?, cipher: args[1].to_vec() })
            }
            b"Check" => {
                want(5)?;
                let draw = match args[0] {
                    [0] => false,
                    [1] => true,
                    _ => return Err(format("draw flag must be one byte 0 or 1")),
                };
                let mut ar = Reader::new(args[3]);
                let accounts = (0..ar.u32()?).map(|_| ar.u32().map(AccountId)).collect::<Result<Vec<_>>>()?;
                ar.finish()?;
                let mut lr = Reader::new(args[4]);
                let alphas = (0..lr.u32()?).map(|_| lr.u64()).collect::<Result<Vec<_>>>()?;
                lr.finish()?;
                Ok(Call::Check(CheckCall { draw, esid: esid(args[1])?, cipher: args[2].to_vec(), accounts, alphas }))
            }
            _ => Err(format(format!("unknown function {:?}", String::from_utf8_lossy(&name)))),
        }
    }
}

/// `(from, to, value, data, aux, sig)` with the signature over everything before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub from: AccountId,
    pub to: AccountId,
    pub value: u64,
    pub data: Vec<u8>,
    pub aux: Vec<u8>,
    pub sig: [u8; SIGNATURE_LEN],
}

fn signing_bytes(from: AccountId, to: AccountId, value: u64, data: &[u8], aux: &[u8]) -> Vec<u8> {
    let mut w = Writer::with_capacity(data.len() + aux.len() + 24);
    w.u32(from.0).u32(to.0).u64(value).blob(data).blob(aux);
    w.finish()
}

impl Transaction {
    pub fn new(from: AccountId, to: AccountId, value: u64, call: &Call, aux: Vec<u8>, key: &SignKey) -> Self {
        let data = call.encode();
        let sig = sig_sign(key, &signing_bytes(from, to, value, &data, &aux));
        Self { from, to, value, data, aux, sig }
    }

    pub fn signed_bytes(&self) -> Vec<u8> {
        signing_bytes(self.from, self.to, self.value, &self.data, &self.aux)
    }

    /// SHA-256 of the signed fields.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.signed_bytes()).into()
    }

    /// Signed fields followed by the signature.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.signed_bytes();
        out.extend_from_slice(&self.sig);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let from = AccountId(r.u32()?);
        let to = AccountId(r.u32()?);
        let value = r.u64()?;
        let data = r.blob()?.to_vec();
        let aux = r.blob()?.to_vec();
        let sig = r.array::<SIGNATURE_LEN>()?;
        r.finish()?;
        Ok(Self { from, to, value, data, aux, sig })
    }

    /// Wire size including the signature.
    pub fn encoded_len(&self) -> usize {
        self.signed_bytes().len() + SIGNATURE_LEN
    }

    pub fn call(&self) -> Result<Call> {
        Call::decode(&self.data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    pub digest: [u8; 32],
    pub queued_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    KeyPublished { account: AccountId },
    Initialized { contract: AccountId, value: u64, dep: u64, prds: u32 },
    Recorded { contract: AccountId, account: AccountId, esid: String },
    RecordIgnored { contract: AccountId, account: AccountId, esid: String },
    Verdict { contract: AccountId, esid: String, verdict: Verdict },
    CheckReplayed { contract: AccountId, esid: String },
    Slashed { contract: AccountId, esid: String, amount: u64, payouts: Vec<(AccountId, u64)> },
    WithdrawalScheduled { contract: AccountId, due: u64 },
    WithdrawalPaid { contract: AccountId, to: AccountId, amount: u64 },
    Failed { from: AccountId, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainEvent {
    pub height: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Ledger state: accounts, published keys, contracts, and the pending queue.
pub struct Chain {
    height: u64,
    balances: BTreeMap<AccountId, u64>,
    keys: BTreeMap<AccountId, VerifyKey>,
    published: BTreeMap<AccountId, Vec<u8>>,
    contracts: BTreeMap<AccountId, Contract>,
    pending: Vec<Transaction>,
    applied: Vec<(u64, Transaction)>,
    events: Vec<ChainEvent>,
    supply: u128,
    next_account: u32,
}

impl Default for Chain {
    fn default() -> Self {
        Self::new()
    }
}

impl Chain {
    pub fn new() -> Self {
        Self {
            height: 0,
            balances: BTreeMap::new(),
            keys: BTreeMap::new(),
            published: BTreeMap::new(),
            contracts: BTreeMap::new(),
            pending: Vec::new(),
            applied: Vec::new(),
            events: Vec::new(),
            supply: 0,
            next_account: 1,
        }
    }

    fn fresh_id(&mut self) -> AccountId {
        let id = AccountId(self.next_account);
        self.next_account += 1;
        id
    }

    /// Creates a key-controlled account holding `balance` new tokens.
    pub fn open_account(&mut self, key: VerifyKey, balance: u64) -> AccountId {
        let id = self.fresh_id();
        self.keys.insert(id, key);
        self.balances.insert(id, balance);
        self.supply += balance as u128;
        id
    }

    /// Deploys an uninitialized contract owned by `owner`.
    pub fn deploy_contract(&mut self, owner: AccountId, min_value: u64, verifier: Arc<dyn EvalVerifier>) -> AccountId {
        let id = self.fresh_id();
        self.contracts.insert(id, Contract::new(id, owner, min_value, verifier));
        id
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn balance(&self, account: AccountId) -> u64 {
        self.balances.get(&account).copied().unwrap_or(0)
    }

    pub fn published_key(&self, account: AccountId) -> Option<&[u8]> {
        self.published.get(&account).map(Vec::as_slice)
    }

    pub fn contract(&self, id: AccountId) -> Option<&Contract> {
        self.contracts.get(&id)
    }

    pub fn events(&self) -> &[ChainEvent] {
        &self.events
    }

    /// Successfully applied transactions with their block heights.
    pub fn applied(&self) -> &[(u64, Transaction)] {
        &self.applied
    }

    /// Applied check transactions sent to `contract` under `esid`, oldest first.
    pub fn check_transactions(&self, contract: AccountId, esid: &Esid) -> Vec<&Transaction> {
        self.applied
            .iter()
            .map(|(_, tx)| tx)
            .filter(|tx| tx.to == contract)
            .filter(|tx| matches!(tx.call(), Ok(Call::Check(c)) if &c.esid == esid))
            .collect()
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Tokens in accounts plus tokens escrowed in contracts.
    pub fn circulating(&self) -> u128 {
        self.balances.values().map(|&b| b as u128).sum::<u128>()
            + self.contracts.values().map(|c| c.dep() as u128).sum::<u128>()
    }

    /// Verifies the signature under the sender's registered key and queues the transaction.
    pub fn submit_tx(&mut self, tx: Transaction) -> Result<Receipt> {
        let key = self.keys.get(&tx.from).ok_or_else(|| Error::Rejected(format!("unknown sender {}", tx.from)))?;
        if !sig_verify(key, &tx.signed_bytes(), &tx.sig) {
            return Err(Error::Rejected("bad signature".into()));
        }
        let receipt = Receipt { digest: tx.digest(), queued_at: self.height };
        self.pending.push(tx);
        Ok(receipt)
    }

    /// Applies queued transactions in submission order, then due withdrawals.
    pub fn produce_block(&mut self) -> Result<u64> {
        self.height += 1;
        for tx in std::mem::take(&mut self.pending) {
            match self.apply(&tx) {
                Ok(()) => self.applied.push((self.height, tx)),
                Err(reason) => self.emit(EventKind::Failed { from: tx.from, reason }),
            }
        }
        let height = self.height;
        let due: Vec<AccountId> = self
            .contracts
            .iter()
            .filter(|(_, c)| c.withdrawal_due(height))
            .map(|(&id, _)| id)
            .collect();
        for id in due {
            let contract = self.contracts.get_mut(&id).expect("listed above");
            let (to, amount) = contract.pay_out();
            *self.balances.entry(to).or_default() += amount;
            self.emit(EventKind::WithdrawalPaid { contract: id, to, amount });
        }
        if self.circulating() != self.supply {
            return Err(Error::Rejected(format!(
                "token conservation violated at height {}: {} != {}",
                self.height,
                self.circulating(),
                self.supply
            )));
        }
        Ok(self.height)
    }

    fn emit(&mut self, kind: EventKind) {
        self.events.push(ChainEvent { height: self.height, kind });
    }

    fn apply(&mut self, tx: &Transaction) -> std::result::Result<(), String> {
        let call = tx.call().map_err(|e| e.to_string())?;
        if let Call::PublishKey { key } = &call {
            if tx.to != tx.from || tx.value != 0 {
                return Err("key publication must be a zero-value self transaction".into());
            }
            self.published.insert(tx.from, key.clone());
            self.emit(EventKind::KeyPublished { account: tx.from });
            return Ok(());
        }
        let height = self.height;
        let balance = self.balance(tx.from);
        let contract = self.contracts.get_mut(&tx.to).ok_or_else(|| format!("{} is not a contract", tx.to))?;
        if tx.value > balance {
            return Err(format!("insufficient balance {balance} for value {}", tx.value));
        }
        if tx.value > 0 && !matches!(call, Call::Init { .. }) {
            return Err(format!("{} does not accept value", call.name()));
        }
        let effects = contract.execute(tx, call, height)?;
        for (account, delta) in effects.transfers {
            let bal = self.balances.entry(account).or_default();
            *bal = bal.checked_add_signed(delta).ok_or("negative balance")?;
        }
        self.events.extend(effects.events.into_iter().map(|kind| ChainEvent { height, kind }));
        Ok(())
    }

    /// Structured snapshot for assertions and output files.
    pub fn dump(&self) -> ChainDump {
        ChainDump {
            height: self.height,
            supply: self.supply as u64,
            balances: self.balances.iter().map(|(&a, &b)| (a.to_string(), b)).collect(),
            published_keys: self.published.iter().map(|(&a, k)| (a.to_string(), hex::encode(Sha256::digest(k)))).collect(),
            contracts: self.contracts.iter().map(|(&id, c)| (id.to_string(), c.dump())).collect(),
            events: self.events.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDump {
    pub height: u64,
    pub supply: u64,
    pub balances: BTreeMap<String, u64>,
    pub published_keys: BTreeMap<String, String>,
    pub contracts: BTreeMap<String, contract::ContractDump>,
    pub events: Vec<ChainEvent>,
}

impl ChainDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serializes")
    }
}

#[cfg(test)]
mod tests;
