use std::collections::BTreeSet;

use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::message::{signed_advert, Advert, AdvertBody, RoundMessage};
use super::{ClientPolicy, ProtocolConfig, Variant};
use crate::chain::{AccountId, Call, Chain, CheckCall, Esid, Transaction};
use crate::crypto::{cert_verify, sig_sign, sig_verify, Certificate, IssuerKey, SignKey};
use crate::scheme::{Scheme, ShareBundle};

/// Long-term material a secure-variant user holds besides its scheme keys.
#[derive(Debug, Clone)]
pub struct SecureIdentity {
    pub account: AccountId,
    pub sign_key: SignKey,
    pub certificate: Certificate,
    pub issuer: IssuerKey,
    pub server: AccountId,
    pub contract: AccountId,
}

/// Certificates bind the little-endian account number.
pub(crate) fn account_identity(account: AccountId) -> Vec<u8> {
    account.0.to_le_bytes().to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClientStatus {
    Idle,
    Waiting { round: u8 },
    Declined { reason: String },
    VerifyFailed { round: u8, reason: String },
    Stopped { round: u8, reason: String },
    Dropped { round: u8 },
    Finished,
}

/// What a client emits in round 3.
#[derive(Debug, Clone)]
pub enum CipherSubmission {
    Message(RoundMessage),
    Record(Transaction),
}

struct Peer<K> {
    ordinal: u32,
    account: Option<AccountId>,
    key: K,
}

struct Session<S: Scheme> {
    esid: Option<Esid>,
    roster: Vec<Peer<S::PublicKey>>,
    ordinal: u32,
    retained: Option<S::Retained>,
    bundles: Vec<ShareBundle>,
    u2: BTreeSet<u32>,
}

/// One user's side of the protocol.
pub struct Client<S: Scheme> {
    user: u32,
    scheme: S,
    t: usize,
    variant: Variant,
    window: u64,
    policy: ClientPolicy,
    keys: S::KeyPair,
    public: S::PublicKey,
    secure: Option<SecureIdentity>,
    status: ClientStatus,
    session: Option<Session<S>>,
    rng: Option<ChaCha20Rng>,
}

type Step<T> = std::result::Result<T, ClientStatus>;

impl<S: Scheme + Clone> Client<S> {
    pub fn new(user: u32, scheme: S, config: &ProtocolConfig, keys: S::KeyPair, secure: Option<SecureIdentity>) -> Self {
        let public = scheme.public_key(&keys);
        Self {
            user,
            scheme,
            t: config.t,
            variant: config.variant,
            window: config.freshness_window,
            policy: config.policy,
            keys,
            public,
            secure,
            status: ClientStatus::Idle,
            session: None,
            rng: None,
        }
    }
}

impl<S: Scheme> Client<S> {
    pub fn user(&self) -> u32 {
        self.user
    }

    pub fn status(&self) -> &ClientStatus {
        &self.status
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.public
    }

    pub fn keys(&self) -> &S::KeyPair {
        &self.keys
    }

    pub fn identity(&self) -> Option<&SecureIdentity> {
        self.secure.as_ref()
    }

    /// The share this client kept of its own secret in the current period.
    pub fn retained(&self) -> Option<&S::Retained> {
        self.session.as_ref().and_then(|s| s.retained.as_ref())
    }

    /// Roster ordinal assigned in round 1 of the current period.
    pub fn ordinal(&self) -> Option<u32> {
        self.session.as_ref().map(|s| s.ordinal)
    }

    pub fn begin_period(&mut self, rng: ChaCha20Rng) {
        self.status = ClientStatus::Idle;
        self.session = None;
        self.rng = Some(rng);
    }

    pub fn mark_dropped(&mut self, round: u8) {
        if self.is_live() {
            self.status = ClientStatus::Dropped { round };
        }
    }

    pub fn is_live(&self) -> bool {
        matches!(self.status, ClientStatus::Idle | ClientStatus::Waiting { .. })
    }

    fn expecting(&self, round: u8) -> bool {
        match self.status {
            ClientStatus::Idle => round == 1,
            ClientStatus::Waiting { round: r } => r == round,
            _ => false,
        }
    }

    fn settle<T>(&mut self, round: u8, step: Step<T>) -> Option<T> {
        match step {
            Ok(v) => {
                self.status = if round == 4 { ClientStatus::Finished } else { ClientStatus::Waiting { round: round + 1 } };
                Some(v)
            }
            Err(status) => {
                self.status = status;
                None
            }
        }
    }

    /// Builds `m_{u,1}`. The secure variant first checks the contract against
    /// the local policy.
    pub fn round1(&mut self, now: u64, chain: Option<&Chain>) -> Option<RoundMessage> {
        if !self.expecting(1) {
            return None;
        }
        let step = self.advertise(now, chain);
        self.settle(1, step)
    }

    fn advertise(&self, now: u64, chain: Option<&Chain>) -> Step<RoundMessage> {
        let body = match (&self.secure, self.variant) {
            (None, Variant::Basic) => AdvertBody::Basic { public_key: self.scheme.encode_public_key(&self.public) },
            (Some(id), Variant::Secure) => {
                let declined = |reason: String| ClientStatus::Declined { reason };
                let chain = chain.ok_or_else(|| declined("no chain view".into()))?;
                let c = chain.contract(id.contract).ok_or_else(|| declined(format!("no contract at {}", id.contract)))?;
                if c.owner() != id.server || !c.is_initialized() || c.is_terminated() {
                    return Err(declined("contract not active for this server".into()));
                }
                if c.dep() < self.policy.min_deposit {
                    return Err(declined(format!("deposit {} below {}", c.dep(), self.policy.min_deposit)));
                }
                if c.prds() < self.policy.min_periods {
                    return Err(declined(format!("{} periods left, need {}", c.prds(), self.policy.min_periods)));
                }
                if (c.threshold() as usize) < self.policy.min_threshold.max(self.t) {
                    return Err(declined(format!("contract threshold {} too small", c.threshold())));
                }
                AdvertBody::Secure {
                    account: id.account,
                    timestamp: now,
                    signature: sig_sign(&id.sign_key, &signed_advert(id.account, now)),
                    certificate: id.certificate.clone(),
                }
            }
            _ => return Err(ClientStatus::Declined { reason: "identity does not match variant".into() }),
        };
        Ok(RoundMessage::Advertise(Advert { user: self.user, body }))
    }

    /// Checks the roster and returns `m_{u,2}` with one encrypted bundle per peer.
    pub fn round2(&mut self, msg: &RoundMessage, now: u64, chain: Option<&Chain>) -> Option<RoundMessage> {
        if !self.expecting(2) {
            return None;
        }
        let step = self.share_keys(msg, now, chain);
        self.settle(2, step)
    }

    fn share_keys(&mut self, msg: &RoundMessage, now: u64, chain: Option<&Chain>) -> Step<RoundMessage> {
        let fail = |reason: String| ClientStatus::VerifyFailed { round: 2, reason };
        let RoundMessage::Roster { esid, entries } = msg else {
            return Err(fail(format!("expected a roster, got {}", msg.kind())));
        };
        if esid.is_some() != (self.variant == Variant::Secure) {
            return Err(fail("session id presence does not match variant".into()));
        }
        if entries.len() < self.t {
            return Err(ClientStatus::Stopped {
                round: 2,
                reason: format!("roster of {} below threshold {}", entries.len(), self.t),
            });
        }
        let mut sorted: Vec<&Advert> = entries.iter().collect();
        sorted.sort_by_key(|a| a.user);
        if sorted.windows(2).any(|w| w[0].user == w[1].user) {
            return Err(fail("duplicate identity in roster".into()));
        }
        let mut roster = Vec::with_capacity(sorted.len());
        let mut ordinal = None;
        for (i, advert) in sorted.iter().enumerate() {
            let ord = i as u32 + 1;
            let (account, key) = self.peer_key(advert, now, chain).map_err(fail)?;
            if advert.user == self.user {
                if key != self.public || account != self.secure.as_ref().map(|s| s.account) {
                    return Err(fail("own roster entry altered".into()));
                }
                ordinal = Some(ord);
            }
            roster.push(Peer { ordinal: ord, account, key });
        }
        let ordinal = ordinal.ok_or_else(|| fail("own identity missing from roster".into()))?;
        let peers: Vec<_> = roster
            .iter()
            .filter(|p| p.ordinal != ordinal)
            .map(|p| (p.ordinal, self.scheme.transport_key(&p.key)))
            .collect();
        let rng = self.rng.as_mut().expect("period started");
        let (bundles, retained) = self
            .scheme
            .share(&self.keys, ordinal, &peers, self.t, rng)
            .map_err(|e| ClientStatus::Stopped { round: 2, reason: e.to_string() })?;
        self.session = Some(Session {
            esid: *esid,
            roster,
            ordinal,
            retained: Some(retained),
            bundles: Vec::new(),
            u2: BTreeSet::new(),
        });
        Ok(RoundMessage::Shares { user: self.user, bundles })
    }

    fn peer_key(&self, advert: &Advert, now: u64, chain: Option<&Chain>) -> std::result::Result<(Option<AccountId>, S::PublicKey), String> {
        match (&advert.body, &self.secure) {
            (AdvertBody::Basic { public_key }, None) => {
                let key = self.scheme.decode_public_key(public_key).map_err(|e| format!("u{}: {e}", advert.user))?;
                Ok((None, key))
            }
            (AdvertBody::Secure { account, timestamp, signature, certificate }, Some(id)) => {
                let u = advert.user;
                if !cert_verify(certificate, &id.issuer) || certificate.identity != account_identity(*account) {
                    return Err(format!("u{u}: certificate invalid for {account}"));
                }
                if !sig_verify(&certificate.key, &signed_advert(*account, *timestamp), signature) {
                    return Err(format!("u{u}: signature invalid"));
                }
                if timestamp.abs_diff(now) > self.window {
                    return Err(format!("u{u}: timestamp {timestamp} outside window around {now}"));
                }
                let chain = chain.ok_or("no chain view")?;
                let bytes = chain.published_key(*account).ok_or_else(|| format!("u{u}: no key published at {account}"))?;
                let key = self.scheme.decode_public_key(bytes).map_err(|e| format!("u{u}: {e}"))?;
                Ok((Some(*account), key))
            }
            _ => Err(format!("u{}: advert does not match variant", advert.user)),
        }
    }

    /// Combines the keys of everyone who shared and encrypts `data`.
    pub fn round3(&mut self, msg: &RoundMessage, data: &[u64]) -> Option<CipherSubmission> {
        if !self.expecting(3) {
            return None;
        }
        let step = self.encrypt(msg, data);
        self.settle(3, step)
    }

    fn encrypt(&mut self, msg: &RoundMessage, data: &[u64]) -> Step<CipherSubmission> {
        let stop = |reason: String| ClientStatus::Stopped { round: 3, reason };
        let RoundMessage::Routed { bundles } = msg else {
            return Err(stop(format!("expected routed shares, got {}", msg.kind())));
        };
        let session = self.session.as_mut().expect("round 2 completed");
        let mut u2 = BTreeSet::from([session.ordinal]);
        for b in bundles {
            let known = session.roster.iter().any(|p| p.ordinal == b.sender);
            if b.recipient != session.ordinal || !known || !u2.insert(b.sender) {
                return Err(ClientStatus::VerifyFailed { round: 3, reason: format!("unexpected bundle from ordinal {}", b.sender) });
            }
        }
        if u2.len() < self.t {
            return Err(stop(format!("{} sharers below threshold {}", u2.len(), self.t)));
        }
        let keys: Vec<&S::PublicKey> =
            session.roster.iter().filter(|p| u2.contains(&p.ordinal)).map(|p| &p.key).collect();
        let pk = self.scheme.combine_keys(&keys).map_err(|e| stop(e.to_string()))?;
        let rng = self.rng.as_mut().expect("period started");
        let ct = self.scheme.encrypt(&pk, data, rng).map_err(|e| stop(e.to_string()))?;
        let cipher = self.scheme.encode_ciphertext(&ct);
        session.bundles = bundles.clone();
        session.u2 = u2;
        match (&self.secure, session.esid) {
            (Some(id), Some(esid)) => Ok(CipherSubmission::Record(Transaction::new(
                id.account,
                id.contract,
                0,
                &Call::Record { esid, cipher },
                Vec::new(),
                &id.sign_key,
            ))),
            _ => Ok(CipherSubmission::Message(RoundMessage::Cipher { user: self.user, cipher })),
        }
    }

    /// Basic variant: partially decrypts the server's evaluation.
    pub fn round4_basic(&mut self, msg: &RoundMessage) -> Option<RoundMessage> {
        if !self.expecting(4) {
            return None;
        }
        let step = match msg {
            RoundMessage::Evaluated { cipher } => self.partial(cipher),
            other => Err(ClientStatus::Stopped { round: 4, reason: format!("expected evaluation, got {}", other.kind()) }),
        };
        self.settle(4, step)
    }

    /// Validates a check transaction against this period's view; returns its
    /// arguments when the roster claim is acceptable.
    pub fn accept_check(&self, tx: &Transaction) -> std::result::Result<CheckCall, String> {
        let id = self.secure.as_ref().ok_or("basic clients take no check transactions")?;
        let session = self.session.as_ref().ok_or("no session")?;
        if tx.from != id.server || tx.to != id.contract {
            return Err("check not from the server to the contract".into());
        }
        let Ok(Call::Check(call)) = tx.call() else {
            return Err("transaction is not a check".into());
        };
        if Some(call.esid) != session.esid {
            return Err("check carries a foreign session id".into());
        }
        let u2_accounts: BTreeSet<AccountId> = session
            .roster
            .iter()
            .filter(|p| session.u2.contains(&p.ordinal))
            .filter_map(|p| p.account)
            .collect();
        let claimed: BTreeSet<AccountId> = call.accounts.iter().copied().collect();
        if claimed.len() != call.accounts.len() {
            return Err("check lists an account twice".into());
        }
        if let Some(stranger) = claimed.iter().find(|a| !u2_accounts.contains(a)) {
            return Err(format!("check includes {stranger}, which did not share keys"));
        }
        if claimed.len() < self.t {
            return Err(format!("check covers {} accounts, below threshold {}", claimed.len(), self.t));
        }
        if !claimed.contains(&id.account) {
            return Err("own ciphertext not included".into());
        }
        Ok(call)
    }

    /// Secure variant: reads the server's check for this period from chain,
    /// compares it with any copy received off chain, and partially decrypts.
    /// Returns the partial (if any) and conflicting check transactions to
    /// submit to the contract as evidence.
    pub fn round4_secure(&mut self, chain: &Chain, relayed: &[Transaction]) -> (Option<RoundMessage>, Vec<Transaction>) {
        if !self.expecting(4) {
            return (None, Vec::new());
        }
        let (id, esid) = match (&self.secure, self.session.as_ref().and_then(|s| s.esid)) {
            (Some(id), Some(esid)) => (id, esid),
            _ => {
                self.status = ClientStatus::Stopped { round: 4, reason: "no secure session".into() };
                return (None, Vec::new());
            }
        };
        let on_chain = chain.check_transactions(id.contract, &esid);
        let Some(&canonical) = on_chain.first() else {
            self.status = ClientStatus::Stopped { round: 4, reason: "no check transaction on chain".into() };
            return (None, Vec::new());
        };
        let digest = canonical.digest();
        let evidence: Vec<Transaction> = relayed
            .iter()
            .filter(|tx| tx.digest() != digest && self.accept_check(tx).map(|c| c.esid == esid).unwrap_or(false))
            .cloned()
            .collect();
        if !evidence.is_empty() || on_chain.iter().any(|tx| tx.digest() != digest) {
            self.status = ClientStatus::VerifyFailed { round: 4, reason: "conflicting check transactions".into() };
            return (None, evidence);
        }
        let step = match self.accept_check(canonical) {
            Ok(call) => self.partial(&call.cipher),
            Err(reason) => Err(ClientStatus::VerifyFailed { round: 4, reason }),
        };
        (self.settle(4, step), Vec::new())
    }

    fn partial(&self, cipher: &[u8]) -> Step<RoundMessage> {
        let stop = |reason: String| ClientStatus::Stopped { round: 4, reason };
        let session = self.session.as_ref().expect("round 3 completed");
        let ct = self.scheme.decode_ciphertext(cipher).map_err(|e| stop(e.to_string()))?;
        let retained = session.retained.as_ref().expect("shares retained");
        let p = self
            .scheme
            .pardec(&ct, &self.keys, session.ordinal, &session.bundles, retained)
            .map_err(|e| stop(e.to_string()))?;
        Ok(RoundMessage::Partial { user: self.user, partial: self.scheme.encode_partial(&p) })
    }
}
