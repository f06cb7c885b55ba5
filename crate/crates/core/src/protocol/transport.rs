//! In-process network: one FIFO queue per directed link and a transcript of
//! every message and transaction.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::message::RoundMessage;
use crate::chain::Transaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Server,
    User(u32),
    Chain,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Server => f.write_str("server"),
            NodeId::User(u) => write!(f, "u{u}"),
            NodeId::Chain => f.write_str("chain"),
        }
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub period: u32,
    pub round: u8,
    pub from: NodeId,
    pub to: NodeId,
    pub bytes: Vec<u8>,
}

impl Envelope {
    pub fn open(&self) -> crate::Result<RoundMessage> {
        RoundMessage::decode(&self.bytes)
    }
}

/// One line of the exported transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptRecord {
    pub period: u32,
    pub round: u8,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub kind: String,
    /// Full encoded size.
    pub bytes: usize,
    /// Number of scheme-level objects carried.
    pub items: usize,
    /// Encoded size of those objects alone.
    pub payload: usize,
    /// SHA-256 of the encoding, hex.
    pub digest: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub fn push(&mut self, record: TranscriptRecord) {
        self.records.push(record);
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TranscriptRecord> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}

#[derive(Debug, Default)]
pub struct SimNet {
    queues: BTreeMap<NodeId, BTreeMap<NodeId, VecDeque<Envelope>>>,
    transcript: Transcript,
}

impl SimNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn send(&mut self, period: u32, from: NodeId, to: NodeId, msg: &RoundMessage) {
        let bytes = msg.encode();
        let (items, payload) = msg.components();
        self.transcript.push(TranscriptRecord {
            period,
            round: msg.round(),
            sender: from,
            receiver: to,
            kind: msg.kind().to_string(),
            bytes: bytes.len(),
            items,
            payload,
            digest: hex::encode(Sha256::digest(&bytes)),
        });
        let env = Envelope { period, round: msg.round(), from, to, bytes };
        self.queues.entry(to).or_default().entry(from).or_default().push_back(env);
    }

    /// Logs a transaction submitted to the chain; `payload` is the size of the
    /// ciphertext it carries, if any.
    pub fn log_tx(&mut self, period: u32, round: u8, from: NodeId, kind: &str, tx: &Transaction, payload: Option<usize>) {
        let bytes = tx.to_bytes();
        self.transcript.push(TranscriptRecord {
            period,
            round,
            sender: from,
            receiver: NodeId::Chain,
            kind: kind.to_string(),
            bytes: bytes.len(),
            items: payload.is_some() as usize,
            payload: payload.unwrap_or(0),
            digest: hex::encode(Sha256::digest(&bytes)),
        });
    }

    /// Delivers up to `budget` queued envelopes for `to`, ordered by sender then
    /// arrival, and discards the rest as timed out. Returns the delivered
    /// envelopes and the number discarded.
    pub fn deliver(&mut self, to: NodeId, budget: usize) -> (Vec<Envelope>, usize) {
        let Some(links) = self.queues.remove(&to) else {
            return (Vec::new(), 0);
        };
        let all: Vec<Envelope> = links.into_values().flatten().collect();
        let late = all.len().saturating_sub(budget);
        (all.into_iter().take(budget).collect(), late)
    }

    pub fn pending_for(&self, to: NodeId) -> usize {
        self.queues.get(&to).map_or(0, |l| l.values().map(VecDeque::len).sum())
    }
}
