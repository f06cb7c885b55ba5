use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use super::message::{Advert, AdvertBody, RoundMessage};
use super::transport::{Envelope, NodeId};
use super::{AbortReason, Attack, ProtocolConfig, RosterGate, Variant};
use crate::chain::{AccountId, Call, Chain, CheckCall, Esid, Transaction};
use crate::crypto::SignKey;
use crate::scheme::{Scheme, ShareBundle};

/// The server's chain identity in the secure variant.
#[derive(Debug, Clone)]
pub struct ServerIdentity {
    pub account: AccountId,
    pub sign_key: SignKey,
    pub contract: AccountId,
}

/// `SHA-256(acc_S ‖ period)` truncated to 16 bytes.
pub fn session_id(account: AccountId, period: u32) -> Esid {
    let mut h = Sha256::new();
    h.update(b"esid");
    h.update(account.0.to_le_bytes());
    h.update(u64::from(period).to_le_bytes());
    h.finalize()[..16].try_into().expect("16 bytes")
}

/// Everything the server accumulates during one period.
pub struct PeriodState<S: Scheme> {
    pub period: u32,
    pub esid: Option<Esid>,
    pub u1: Vec<u32>,
    pub u2: Vec<u32>,
    pub u3: Vec<u32>,
    pub u4: Vec<u32>,
    pub alphas: BTreeMap<u32, u64>,
    pub audit: Vec<String>,
    adverts: BTreeMap<u32, Advert>,
    ordinals: BTreeMap<u32, u32>,
    bundles: BTreeMap<u32, Vec<ShareBundle>>,
    ciphers: BTreeMap<u32, S::Ciphertext>,
    evaluated: Option<S::Ciphertext>,
    partials: BTreeMap<u32, S::Partial>,
}

impl<S: Scheme> PeriodState<S> {
    fn new(period: u32, esid: Option<Esid>) -> Self {
        Self {
            period,
            esid,
            u1: Vec::new(),
            u2: Vec::new(),
            u3: Vec::new(),
            u4: Vec::new(),
            alphas: BTreeMap::new(),
            audit: Vec::new(),
            adverts: BTreeMap::new(),
            ordinals: BTreeMap::new(),
            bundles: BTreeMap::new(),
            ciphers: BTreeMap::new(),
            evaluated: None,
            partials: BTreeMap::new(),
        }
    }

    pub fn evaluated(&self) -> Option<&S::Ciphertext> {
        self.evaluated.as_ref()
    }

    pub fn ciphers(&self) -> &BTreeMap<u32, S::Ciphertext> {
        &self.ciphers
    }

    fn account(&self, user: u32) -> Option<AccountId> {
        self.adverts.get(&user).and_then(Advert::account)
    }
}

/// What the secure server emits in round 3.
pub struct CheckSubmission {
    pub check: Transaction,
    /// Off-chain copy for one user, used only by the conflicting-check fixture.
    pub relay: Option<(u32, Transaction)>,
}

type Step<T> = std::result::Result<T, AbortReason>;

pub struct Server<S: Scheme> {
    scheme: S,
    t: usize,
    gate: RosterGate,
    variant: Variant,
    attack: Attack,
    identity: Option<ServerIdentity>,
    state: PeriodState<S>,
}

fn sender(env: &Envelope) -> Option<u32> {
    match env.from {
        NodeId::User(u) => Some(u),
        _ => None,
    }
}

impl<S: Scheme> Server<S> {
    pub fn new(scheme: S, config: &ProtocolConfig, identity: Option<ServerIdentity>) -> Self {
        Self {
            scheme,
            t: config.t,
            gate: config.roster_gate,
            variant: config.variant,
            attack: config.attack,
            identity,
            state: PeriodState::new(0, None),
        }
    }

    pub fn state(&self) -> &PeriodState<S> {
        &self.state
    }

    pub fn identity(&self) -> Option<&ServerIdentity> {
        self.identity.as_ref()
    }

    pub fn begin_period(&mut self, period: u32) {
        let esid = self.identity.as_ref().map(|id| session_id(id.account, period));
        self.state = PeriodState::new(period, esid);
    }

    fn note(&mut self, line: String) {
        self.state.audit.push(line);
    }

    /// Opens envelopes, dropping non-user senders, undecodable bytes, and repeats.
    fn open_all(&mut self, envs: Vec<Envelope>, round: u8) -> Vec<(u32, RoundMessage)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for env in envs {
            let Some(u) = sender(&env) else {
                self.note(format!("round {round}: message from {} ignored", env.from));
                continue;
            };
            match env.open() {
                Ok(msg) if msg.round() == round && seen.insert(u) => out.push((u, msg)),
                Ok(msg) if msg.round() == round => self.note(format!("round {round}: duplicate {} from u{u} ignored", msg.kind())),
                Ok(msg) => self.note(format!("round {round}: out-of-round {} from u{u} ignored", msg.kind())),
                Err(e) => self.note(format!("round {round}: undecodable message from u{u}: {e}")),
            }
        }
        out
    }

    /// Builds `U_e¹` and `m_{S,1}`.
    pub fn round1(&mut self, envs: Vec<Envelope>) -> Step<RoundMessage> {
        for (u, msg) in self.open_all(envs, 1) {
            let RoundMessage::Advertise(advert) = msg else { continue };
            let well_formed = matches!(
                (&advert.body, self.variant),
                (AdvertBody::Basic { .. }, Variant::Basic) | (AdvertBody::Secure { .. }, Variant::Secure)
            );
            if advert.user != u || !well_formed {
                self.note(format!("round 1: malformed advert from u{u} ignored"));
                continue;
            }
            self.state.adverts.insert(u, advert);
        }
        let have = self.state.adverts.len();
        if !self.gate.admits(have, self.t) {
            return Err(AbortReason::Threshold { needed: self.gate.needed(self.t), have });
        }
        self.state.u1 = self.state.adverts.keys().copied().collect();
        self.state.ordinals = self.state.u1.iter().enumerate().map(|(i, &u)| (u, i as u32 + 1)).collect();
        Ok(RoundMessage::Roster { esid: self.state.esid, entries: self.state.adverts.values().cloned().collect() })
    }

    /// Builds `U_e²` and one `m_{S,2,v}` per member.
    pub fn round2(&mut self, envs: Vec<Envelope>) -> Step<Vec<(u32, RoundMessage)>> {
        let by_ordinal: BTreeMap<u32, u32> = self.state.ordinals.iter().map(|(&u, &o)| (o, u)).collect();
        for (u, msg) in self.open_all(envs, 2) {
            let RoundMessage::Shares { user, bundles } = msg else { continue };
            let Some(&own) = self.state.ordinals.get(&u) else {
                self.note(format!("round 2: shares from u{u} outside the roster ignored"));
                continue;
            };
            if user != u {
                self.note(format!("round 2: u{u} claimed identity u{user}"));
                continue;
            }
            let mut kept = Vec::new();
            let mut covered = BTreeSet::new();
            for b in bundles {
                match by_ordinal.get(&b.recipient) {
                    Some(_) if b.sender == own && b.recipient != own && covered.insert(b.recipient) => kept.push(b),
                    Some(_) => self.note(format!("round 2: bundle {}→{} from u{u} discarded", b.sender, b.recipient)),
                    None => self.note(format!("round 2: bundle from u{u} to unknown ordinal {} discarded", b.recipient)),
                }
            }
            if covered.len() + 1 != self.state.u1.len() {
                self.note(format!("round 2: u{u} shared with {} of {} peers, excluded", covered.len(), self.state.u1.len() - 1));
                continue;
            }
            self.state.bundles.insert(u, kept);
        }
        let have = self.state.bundles.len();
        if !self.gate.admits(have, self.t) {
            return Err(AbortReason::Threshold { needed: self.gate.needed(self.t), have });
        }
        self.state.u2 = self.state.bundles.keys().copied().collect();
        let routed = self
            .state
            .u2
            .iter()
            .map(|&v| {
                let ord = self.state.ordinals[&v];
                let bundles = self
                    .state
                    .bundles
                    .iter()
                    .filter(|(&u, _)| u != v)
                    .flat_map(|(_, bs)| bs.iter().filter(|b| b.recipient == ord).cloned())
                    .collect();
                (v, RoundMessage::Routed { bundles })
            })
            .collect();
        Ok(routed)
    }

    fn alphas_for(&mut self, users: &[u32], alphas: &BTreeMap<u32, u64>) -> Vec<u64> {
        let picked: Vec<u64> = users.iter().map(|u| alphas.get(u).copied().unwrap_or(1)).collect();
        self.state.alphas = users.iter().copied().zip(picked.iter().copied()).collect();
        picked
    }

    fn evaluate(&mut self, users: &[u32], alphas: &[u64]) -> Step<S::Ciphertext> {
        let cts: Vec<&S::Ciphertext> = users.iter().map(|u| &self.state.ciphers[u]).collect();
        self.scheme.eval(&cts, alphas).map_err(|e| AbortReason::Decryption { detail: e.to_string() })
    }

    fn close_u3(&mut self) -> Step<()> {
        self.state.u3 = self.state.ciphers.keys().copied().collect();
        if self.state.u3.len() < self.t {
            return Err(AbortReason::Threshold { needed: self.t, have: self.state.u3.len() });
        }
        Ok(())
    }

    /// Basic variant: collects `m_{u,3}`, evaluates, and returns `m_{S,3}` for `U_e³`.
    pub fn round3_basic(&mut self, envs: Vec<Envelope>, alphas: &BTreeMap<u32, u64>) -> Step<RoundMessage> {
        for (u, msg) in self.open_all(envs, 3) {
            let RoundMessage::Cipher { user, cipher } = msg else { continue };
            if user != u || !self.state.bundles.contains_key(&u) {
                self.note(format!("round 3: cipher from u{u} outside U2 ignored"));
                continue;
            }
            match self.scheme.decode_ciphertext(&cipher) {
                Ok(ct) => {
                    self.state.ciphers.insert(u, ct);
                }
                Err(e) => self.note(format!("round 3: bad cipher from u{u}: {e}")),
            }
        }
        self.close_u3()?;
        let users = self.state.u3.clone();
        let alphas = self.alphas_for(&users, alphas);
        let ct = self.evaluate(&users, &alphas)?;
        let cipher = self.scheme.encode_ciphertext(&ct);
        self.state.evaluated = Some(ct);
        Ok(RoundMessage::Evaluated { cipher })
    }

    /// Secure variant: reads this period's records from chain, evaluates, and
    /// signs the check transaction.
    pub fn round3_secure(&mut self, chain: &Chain, alphas: &BTreeMap<u32, u64>, draw: bool) -> Step<CheckSubmission> {
        let id = self.identity.clone().expect("secure server has an identity");
        let esid = self.state.esid.expect("secure period has a session id");
        let records = chain.contract(id.contract).and_then(|c| c.records(&esid)).cloned().unwrap_or_default();
        for u in self.state.u2.clone() {
            let Some(acc) = self.state.account(u) else { continue };
            let Some(bytes) = records.get(&acc) else { continue };
            match self.scheme.decode_ciphertext(bytes) {
                Ok(ct) => {
                    self.state.ciphers.insert(u, ct);
                }
                Err(e) => self.note(format!("round 3: bad recorded cipher from u{u}: {e}")),
            }
        }
        self.close_u3()?;
        let honest_users = self.state.u3.clone();
        let honest_alphas = self.alphas_for(&honest_users, alphas);
        let sign = |call: CheckCall| {
            Transaction::new(id.account, id.contract, 0, &Call::Check(call), Vec::new(), &id.sign_key)
        };
        let accounts = |st: &PeriodState<S>, users: &[u32]| -> Vec<AccountId> {
            users.iter().map(|&u| st.account(u).expect("secure adverts carry accounts")).collect()
        };
        match self.attack {
            Attack::SubstituteCipher => {
                let target = honest_users[0];
                let listed: Vec<u32> = honest_users[..self.t - 1].to_vec();
                let mut alphas = vec![0; listed.len()];
                alphas[0] = 1;
                let ct = self.state.ciphers[&target].clone();
                let cipher = self.scheme.encode_ciphertext(&ct);
                self.note(format!("attack: check over {} accounts carries u{target}'s cipher", listed.len()));
                let call = CheckCall { draw, esid, cipher, accounts: accounts(&self.state, &listed), alphas };
                self.state.u3 = listed;
                self.state.evaluated = Some(ct);
                Ok(CheckSubmission { check: sign(call), relay: None })
            }
            Attack::None | Attack::DuplicateEsid => {
                let ct = self.evaluate(&honest_users, &honest_alphas)?;
                let call = CheckCall {
                    draw,
                    esid,
                    cipher: self.scheme.encode_ciphertext(&ct),
                    accounts: accounts(&self.state, &honest_users),
                    alphas: honest_alphas,
                };
                self.state.evaluated = Some(ct);
                let relay = (self.attack == Attack::DuplicateEsid).then(|| {
                    let victim = honest_users[0];
                    let target = honest_users[1];
                    let forged = CheckCall {
                        cipher: self.scheme.encode_ciphertext(&self.state.ciphers[&target]),
                        ..call.clone()
                    };
                    self.state.audit.push(format!("attack: conflicting check with u{target}'s cipher relayed to u{victim}"));
                    (victim, sign(forged))
                });
                Ok(CheckSubmission { check: sign(call), relay })
            }
        }
    }

    /// Collects `m_{u,4}` from `U_e³` and runs FinDec.
    pub fn round4(&mut self, envs: Vec<Envelope>) -> Step<Vec<u64>> {
        let u3: BTreeSet<u32> = self.state.u3.iter().copied().collect();
        for (u, msg) in self.open_all(envs, 4) {
            let RoundMessage::Partial { user, partial } = msg else { continue };
            if user != u || !u3.contains(&u) {
                self.note(format!("round 4: partial from u{u} outside U3 ignored"));
                continue;
            }
            match self.scheme.decode_partial(&partial) {
                Ok(p) if self.scheme.partial_index(&p) == self.state.ordinals[&u] => {
                    self.state.partials.insert(u, p);
                }
                Ok(_) => self.note(format!("round 4: partial from u{u} carries the wrong index")),
                Err(e) => self.note(format!("round 4: bad partial from u{u}: {e}")),
            }
        }
        self.state.u4 = self.state.partials.keys().copied().collect();
        if self.state.u4.len() < self.t {
            return Err(AbortReason::Threshold { needed: self.t, have: self.state.u4.len() });
        }
        let ct = self.state.evaluated.as_ref().expect("round 3 completed");
        let partials: Vec<S::Partial> = self.state.partials.values().cloned().collect();
        self.scheme.findec(self.t, ct, &partials).map_err(|e| AbortReason::Decryption { detail: e.to_string() })
    }
}
