//! Runs deployments of one server and `n` clients period by period.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::client::{account_identity, CipherSubmission, Client, ClientStatus, SecureIdentity};
use super::message::RoundMessage;
use super::server::{CheckSubmission, Server, ServerIdentity};
use super::transport::{Envelope, NodeId, SimNet, Transcript};
use super::{AbortReason, ProtocolConfig, Variant};
use crate::chain::{Call, Chain, Transaction, Verdict, WITHDRAWAL_DELAY};
use crate::crypto::{sig_gen, MockCa};
use crate::error::Result;
use crate::scheme::Scheme;
use crate::seeds::SeedTree;

/// Simulated seconds between periods and between rounds.
const PERIOD_SECONDS: u64 = 600;
const ROUND_SECONDS: u64 = 10;
const EPOCH: u64 = 1_700_000_000;

/// Issuer name of the deployment's certificate authority.
pub const CA_NAME: &[u8] = b"aggregation-ca";

/// Per-user data vectors and the server's coefficients for one period.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PeriodInputs {
    pub data: BTreeMap<u32, Vec<u64>>,
    pub alphas: BTreeMap<u32, u64>,
}

impl PeriodInputs {
    /// Uniform `bits`-bit data for users `1..=n` with unit coefficients.
    pub fn random<R: Rng>(n: usize, dim: usize, bits: u32, rng: &mut R) -> Self {
        let data = (1..=n as u32).map(|u| (u, (0..dim).map(|_| rng.gen_range(0..1u64 << bits)).collect())).collect();
        let alphas = (1..=n as u32).map(|u| (u, 1)).collect();
        Self { data, alphas }
    }

    /// Replaces every coefficient with a uniform `bits`-bit value.
    pub fn with_random_alphas<R: Rng>(mut self, bits: u32, rng: &mut R) -> Self {
        for a in self.alphas.values_mut() {
            *a = rng.gen_range(0..1u64 << bits);
        }
        self
    }
}

/// `Σ α_u m_u` over `users`, reduced mod `modulus` when given.
pub fn plaintext_oracle(inputs: &PeriodInputs, users: &[u32], modulus: Option<u64>) -> Vec<u64> {
    let dim = inputs.data.values().next().map_or(0, Vec::len);
    let mut acc = vec![0u128; dim];
    for u in users {
        let alpha = inputs.alphas.get(u).copied().unwrap_or(1) as u128;
        for (a, &m) in acc.iter_mut().zip(&inputs.data[u]) {
            *a += alpha * m as u128;
        }
    }
    acc.into_iter().map(|v| modulus.map_or(v, |l| v % l as u128) as u64).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PeriodResult {
    Aggregate { values: Vec<u64> },
    Aborted { round: u8, reason: AbortReason },
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodOutcome {
    pub period: u32,
    pub esid: Option<String>,
    /// `U_e¹` through `U_e⁴`; later rosters are empty after an abort.
    pub rosters: [Vec<u32>; 4],
    pub alphas: BTreeMap<u32, u64>,
    pub result: PeriodResult,
    pub clients: BTreeMap<u32, ClientStatus>,
    pub audit: Vec<String>,
    /// The contract's first verdict for this period's session id.
    pub verdict: Option<Verdict>,
    /// Conflicting checks the contract saw for this session id.
    pub conflicts: usize,
}

impl PeriodOutcome {
    pub fn aggregate(&self) -> Option<&[u64]> {
        match &self.result {
            PeriodResult::Aggregate { values } => Some(values),
            PeriodResult::Aborted { .. } => None,
        }
    }

    pub fn slashed(&self) -> bool {
        self.conflicts > 0 || self.verdict.is_some_and(|v| v.is_slash())
    }
}

/// One server, its clients, the network, and in the secure variant the chain.
pub struct Deployment<S: Scheme + Clone> {
    config: ProtocolConfig,
    seeds: SeedTree,
    clients: BTreeMap<u32, Client<S>>,
    server: Server<S>,
    chain: Option<Chain>,
    net: SimNet,
    period: u32,
    skew: BTreeMap<u32, i64>,
    outcomes: Vec<PeriodOutcome>,
    pending_audit: Vec<String>,
}

impl<S: Scheme + Clone> Deployment<S> {
    /// Generates all keys; the secure variant also opens accounts, issues
    /// certificates, deploys and funds the contract, and publishes user keys.
    pub fn new(config: ProtocolConfig, scheme: S, seed: u64) -> Result<Self> {
        config.validate()?;
        let seeds = SeedTree::new(seed);
        let n = config.n_target as u32;
        let keys: BTreeMap<u32, S::KeyPair> =
            (1..=n).map(|u| (u, scheme.keygen(&mut seeds.path(&format!("user/{u}")).rng()))).collect();

        let (chain, server_id, identities) = match config.variant {
            Variant::Basic => (None, None, BTreeMap::new()),
            Variant::Secure => {
                let mut chain = Chain::new();
                let ca = MockCa::new(CA_NAME.to_vec(), &mut seeds.child("ca").rng());
                let (server_sk, server_vk) = sig_gen(&mut seeds.child("server").rng());
                let deposit = config.min_value * u64::from(config.periods);
                let server_acc = chain.open_account(server_vk, deposit);
                let contract = chain.deploy_contract(server_acc, config.min_value, Arc::new(scheme.clone()));
                let mut identities = BTreeMap::new();
                for u in 1..=n {
                    let (sk, vk) = sig_gen(&mut seeds.path(&format!("user/{u}/signing")).rng());
                    let account = chain.open_account(vk, 0);
                    let certificate = ca.issue(&account_identity(account), &vk);
                    let publish = Call::PublishKey { key: scheme.encode_public_key(&scheme.public_key(&keys[&u])) };
                    chain.submit_tx(Transaction::new(account, account, 0, &publish, Vec::new(), &sk))?;
                    identities.insert(
                        u,
                        SecureIdentity { account, sign_key: sk, certificate, issuer: ca.public(), server: server_acc, contract },
                    );
                }
                let init = Call::Init { t: config.t as u32, prds: config.periods };
                chain.submit_tx(Transaction::new(server_acc, contract, deposit, &init, Vec::new(), &server_sk))?;
                chain.produce_block()?;
                let id = ServerIdentity { account: server_acc, sign_key: server_sk, contract };
                (Some(chain), Some(id), identities)
            }
        };
        let mut identities = identities;
        let clients = keys
            .into_iter()
            .map(|(u, kp)| (u, Client::new(u, scheme.clone(), &config, kp, identities.remove(&u))))
            .collect();
        let server = Server::new(scheme, &config, server_id);
        Ok(Self {
            config,
            seeds,
            clients,
            server,
            chain,
            net: SimNet::new(),
            period: 0,
            skew: BTreeMap::new(),
            outcomes: Vec::new(),
            pending_audit: Vec::new(),
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn chain(&self) -> Option<&Chain> {
        self.chain.as_ref()
    }

    pub fn transcript(&self) -> &Transcript {
        self.net.transcript()
    }

    pub fn clients(&self) -> &BTreeMap<u32, Client<S>> {
        &self.clients
    }

    pub fn server(&self) -> &Server<S> {
        &self.server
    }

    /// Direct access to the parties and chain for scripted fixtures.
    pub fn parts_mut(&mut self) -> (&mut Server<S>, &mut BTreeMap<u32, Client<S>>, Option<&mut Chain>) {
        (&mut self.server, &mut self.clients, self.chain.as_mut())
    }

    pub fn outcomes(&self) -> &[PeriodOutcome] {
        &self.outcomes
    }

    /// Offsets user `u`'s clock by `seconds`.
    pub fn set_clock_skew(&mut self, user: u32, seconds: i64) {
        self.skew.insert(user, seconds);
    }

    /// Synthetic 8-bit inputs with unit coefficients, drawn from the seed tree.
    pub fn synthetic_inputs(&self, period: u32) -> PeriodInputs {
        let mut rng = self.seeds.path(&format!("inputs/period/{period}")).rng();
        PeriodInputs::random(self.config.n_target, self.config.dim, 8, &mut rng)
    }

    fn clock(&self, round: u8) -> u64 {
        EPOCH + u64::from(self.period) * PERIOD_SECONDS + u64::from(round) * ROUND_SECONDS
    }

    fn local_clock(&self, user: u32, round: u8) -> u64 {
        self.clock(round).saturating_add_signed(self.skew.get(&user).copied().unwrap_or(0))
    }

    fn live(&self, round: u8) -> Vec<u32> {
        self.clients
            .iter()
            .filter(|(&u, c)| c.is_live() && !self.config.dropouts.is_dropped(u, round))
            .map(|(&u, _)| u)
            .collect()
    }

    /// Marks this round's dropouts offline and discards their mail.
    fn apply_dropouts(&mut self, round: u8) {
        for (&u, client) in self.clients.iter_mut() {
            if self.config.dropouts.drop_round(u) == Some(round) {
                client.mark_dropped(round);
            }
        }
        for u in self.clients.keys().copied().collect::<Vec<_>>() {
            if self.config.dropouts.is_dropped(u, round) {
                self.net.deliver(NodeId::User(u), usize::MAX);
            }
        }
    }

    fn inbox(&mut self, user: u32) -> Vec<RoundMessage> {
        let (envs, _) = self.net.deliver(NodeId::User(user), usize::MAX);
        envs.iter().filter(|e| e.from == NodeId::Server).filter_map(|e| e.open().ok()).collect()
    }

    fn server_inbox(&mut self, round: u8) -> Vec<Envelope> {
        let (envs, late) = self.net.deliver(NodeId::Server, self.config.round_budget);
        if late > 0 {
            self.server_note(format!("round {round}: {late} messages arrived after the budget"));
        }
        envs
    }

    fn server_note(&mut self, line: String) {
        self.pending_audit.push(line);
    }

    fn send(&mut self, from: NodeId, to: NodeId, msg: &RoundMessage) {
        self.net.send(self.period, from, to, msg);
    }

    fn submit(&mut self, round: u8, from: NodeId, kind: &str, tx: Transaction, payload: Option<usize>) {
        self.net.log_tx(self.period, round, from, kind, &tx, payload);
        let chain = self.chain.as_mut().expect("secure variant");
        if let Err(e) = chain.submit_tx(tx) {
            self.pending_audit.push(format!("round {round}: {kind} from {from} rejected: {e}"));
        }
    }

    fn block(&mut self) -> std::result::Result<u64, AbortReason> {
        let chain = self.chain.as_mut().expect("secure variant");
        chain.produce_block().map_err(|e| AbortReason::Chain { detail: e.to_string() })
    }

    /// Runs one period with the given inputs and coefficients.
    pub fn run_period(&mut self, inputs: &PeriodInputs) -> PeriodOutcome {
        self.period += 1;
        let period = self.period;
        self.server.begin_period(period);
        for (&u, c) in self.clients.iter_mut() {
            c.begin_period(self.seeds.path(&format!("user/{u}/period/{period}")).rng());
        }
        let result = match self.rounds(inputs) {
            Ok(values) => PeriodResult::Aggregate { values },
            Err((round, reason)) => PeriodResult::Aborted { round, reason },
        };
        let state = self.server.state();
        let esid = state.esid;
        let (verdict, conflicts) = match (&self.chain, self.server.identity(), esid) {
            (Some(chain), Some(id), Some(esid)) => chain
                .contract(id.contract)
                .and_then(|c| c.check(&esid))
                .map_or((None, 0), |e| (Some(e.verdict), e.conflicts.len())),
            _ => (None, 0),
        };
        let mut audit = std::mem::take(&mut self.pending_audit);
        audit.extend(state.audit.iter().cloned());
        let outcome = PeriodOutcome {
            period,
            esid: esid.map(hex::encode),
            rosters: [state.u1.clone(), state.u2.clone(), state.u3.clone(), state.u4.clone()],
            alphas: state.alphas.clone(),
            result,
            clients: self.clients.iter().map(|(&u, c)| (u, c.status().clone())).collect(),
            audit,
            verdict,
            conflicts,
        };
        self.outcomes.push(outcome.clone());
        outcome
    }

    fn rounds(&mut self, inputs: &PeriodInputs) -> std::result::Result<Vec<u64>, (u8, AbortReason)> {
        let secure = self.config.variant == Variant::Secure;

        // Round 1: AdvertiseKeys / AdvertiseAccounts.
        self.apply_dropouts(1);
        for u in self.live(1) {
            let now = self.local_clock(u, 1);
            let chain = self.chain.as_ref();
            if let Some(msg) = self.clients.get_mut(&u).expect("live").round1(now, chain) {
                self.send(NodeId::User(u), NodeId::Server, &msg);
            }
        }
        let envs = self.server_inbox(1);
        let roster = self.server.round1(envs).map_err(|e| (1, e))?;
        for u in self.server.state().u1.clone() {
            self.send(NodeId::Server, NodeId::User(u), &roster);
        }

        // Round 2: ShareKeys.
        self.apply_dropouts(2);
        for u in self.live(2) {
            let now = self.local_clock(u, 2);
            let mail = self.inbox(u);
            let chain = self.chain.as_ref();
            let client = self.clients.get_mut(&u).expect("live");
            let Some(msg) = mail.iter().find(|m| matches!(m, RoundMessage::Roster { .. })) else { continue };
            if let Some(reply) = client.round2(msg, now, chain) {
                self.send(NodeId::User(u), NodeId::Server, &reply);
            }
        }
        let envs = self.server_inbox(2);
        let routed = self.server.round2(envs).map_err(|e| (2, e))?;
        for (v, msg) in routed {
            self.send(NodeId::Server, NodeId::User(v), &msg);
        }

        // Round 3: CipherCollection.
        self.apply_dropouts(3);
        for u in self.live(3) {
            let mail = self.inbox(u);
            let Some(msg) = mail.iter().find(|m| matches!(m, RoundMessage::Routed { .. })) else { continue };
            let data = &inputs.data[&u];
            match self.clients.get_mut(&u).expect("live").round3(msg, data) {
                Some(CipherSubmission::Message(m)) => self.send(NodeId::User(u), NodeId::Server, &m),
                Some(CipherSubmission::Record(tx)) => {
                    let payload = match tx.call() {
                        Ok(Call::Record { cipher, .. }) => Some(cipher.len()),
                        _ => None,
                    };
                    self.submit(3, NodeId::User(u), "tx_record", tx, payload);
                }
                None => {}
            }
        }
        if secure {
            self.block().map_err(|e| (3, e))?;
            let draw = self.period == self.config.periods;
            let chain = self.chain.as_ref().expect("secure variant");
            let CheckSubmission { check, relay } =
                self.server.round3_secure(chain, &inputs.alphas, draw).map_err(|e| (3, e))?;
            let payload = match check.call() {
                Ok(Call::Check(c)) => Some(c.cipher.len()),
                _ => None,
            };
            self.submit(3, NodeId::Server, "tx_check", check, payload);
            self.block().map_err(|e| (3, e))?;
            if let Some((victim, tx)) = relay {
                self.send(NodeId::Server, NodeId::User(victim), &RoundMessage::CheckRelay { tx: tx.to_bytes() });
            }
        } else {
            let envs = self.server_inbox(3);
            let evaluated = self.server.round3_basic(envs, &inputs.alphas).map_err(|e| (3, e))?;
            for u in self.server.state().u3.clone() {
                self.send(NodeId::Server, NodeId::User(u), &evaluated);
            }
        }

        // Round 4: Decryption.
        self.apply_dropouts(4);
        let mut evidence_sent = false;
        for u in self.live(4) {
            let mail = self.inbox(u);
            let reply = if secure {
                let relayed: Vec<Transaction> = mail
                    .iter()
                    .filter_map(|m| match m {
                        RoundMessage::CheckRelay { tx } => Transaction::from_bytes(tx).ok(),
                        _ => None,
                    })
                    .collect();
                let chain = self.chain.as_ref().expect("secure variant");
                let (reply, evidence) = self.clients.get_mut(&u).expect("live").round4_secure(chain, &relayed);
                for tx in evidence {
                    self.submit(4, NodeId::User(u), "tx_check_evidence", tx, None);
                    evidence_sent = true;
                }
                reply
            } else {
                let Some(msg) = mail.iter().find(|m| matches!(m, RoundMessage::Evaluated { .. })) else { continue };
                self.clients.get_mut(&u).expect("live").round4_basic(msg)
            };
            if let Some(msg) = reply {
                self.send(NodeId::User(u), NodeId::Server, &msg);
            }
        }
        if evidence_sent {
            self.block().map_err(|e| (4, e))?;
        }
        let envs = self.server_inbox(4);
        self.server.round4(envs).map_err(|e| (4, e))
    }

    /// Runs every configured period on synthetic inputs, then lets the
    /// withdrawal delay elapse.
    pub fn run(&mut self) -> Result<Vec<PeriodOutcome>> {
        let mut out = Vec::new();
        for e in 1..=self.config.periods {
            let inputs = self.synthetic_inputs(e);
            out.push(self.run_period(&inputs));
        }
        self.finish()?;
        Ok(out)
    }

    /// Produces the blocks that follow the last period, so a scheduled
    /// withdrawal executes.
    pub fn finish(&mut self) -> Result<()> {
        if let Some(chain) = self.chain.as_mut() {
            for _ in 0..WITHDRAWAL_DELAY {
                chain.produce_block()?;
            }
        }
        Ok(())
    }
}
