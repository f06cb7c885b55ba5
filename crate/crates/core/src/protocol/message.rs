use crate::chain::{AccountId, Esid};
use crate::crypto::{Certificate, SIGNATURE_LEN};
use crate::error::{format, Result};
use crate::scheme::ShareBundle;
use crate::wire::{Reader, Writer};

/// Body of `m_{u,1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdvertBody {
    /// `pk_u` in the clear.
    Basic { public_key: Vec<u8> },
    /// `(acc_u, T_u, σ_u, cert_u)`; the key itself is read from chain.
    Secure { account: AccountId, timestamp: u64, signature: [u8; SIGNATURE_LEN], certificate: Certificate },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advert {
    pub user: u32,
    pub body: AdvertBody,
}

/// The bytes a secure-variant user signs: `acc_u ‖ T_u`.
pub(crate) fn signed_advert(account: AccountId, timestamp: u64) -> Vec<u8> {
    let mut w = Writer::with_capacity(12);
    w.u32(account.0).u64(timestamp);
    w.finish()
}

impl Advert {
    pub fn account(&self) -> Option<AccountId> {
        match &self.body {
            AdvertBody::Secure { account, .. } => Some(*account),
            AdvertBody::Basic { .. } => None,
        }
    }

    fn write(&self, w: &mut Writer) {
        w.u32(self.user);
        match &self.body {
            AdvertBody::Basic { public_key } => {
                w.u8(0).blob(public_key);
            }
            AdvertBody::Secure { account, timestamp, signature, certificate } => {
                w.u8(1).u32(account.0).u64(*timestamp).raw(signature).blob(&certificate.to_bytes());
            }
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self> {
        let user = r.u32()?;
        let body = match r.u8()? {
            0 => AdvertBody::Basic { public_key: r.blob()?.to_vec() },
            1 => AdvertBody::Secure {
                account: AccountId(r.u32()?),
                timestamp: r.u64()?,
                signature: r.array()?,
                certificate: Certificate::from_bytes(r.blob()?)?,
            },
            tag => return Err(format(format!("unknown advert tag {tag}"))),
        };
        Ok(Self { user, body })
    }

    fn payload_len(&self) -> usize {
        match &self.body {
            AdvertBody::Basic { public_key } => public_key.len(),
            AdvertBody::Secure { .. } => 0,
        }
    }
}

/// Every message exchanged between the server and users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundMessage {
    /// `m_{u,1}`.
    Advertise(Advert),
    /// `m_{S,1}`: the round-1 roster, plus the session id in the secure variant.
    Roster { esid: Option<Esid>, entries: Vec<Advert> },
    /// `m_{u,2}`: encrypted shares for every other roster member.
    Shares { user: u32, bundles: Vec<ShareBundle> },
    /// `m_{S,2,v}`: the bundles addressed to one recipient.
    Routed { bundles: Vec<ShareBundle> },
    /// `m_{u,3}` in the basic variant.
    Cipher { user: u32, cipher: Vec<u8> },
    /// `m_{S,3}` in the basic variant.
    Evaluated { cipher: Vec<u8> },
    /// `m_{u,4}`.
    Partial { user: u32, partial: Vec<u8> },
    /// A check transaction handed to a user outside the chain.
    CheckRelay { tx: Vec<u8> },
}

impl RoundMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            RoundMessage::Advertise(_) => "advertise",
            RoundMessage::Roster { .. } => "roster",
            RoundMessage::Shares { .. } => "shares",
            RoundMessage::Routed { .. } => "routed_shares",
            RoundMessage::Cipher { .. } => "cipher",
            RoundMessage::Evaluated { .. } => "evaluated",
            RoundMessage::Partial { .. } => "partial",
            RoundMessage::CheckRelay { .. } => "check_relay",
        }
    }

    pub fn round(&self) -> u8 {
        match self {
            RoundMessage::Advertise(_) | RoundMessage::Roster { .. } => 1,
            RoundMessage::Shares { .. } | RoundMessage::Routed { .. } => 2,
            RoundMessage::Cipher { .. } | RoundMessage::Evaluated { .. } | RoundMessage::CheckRelay { .. } => 3,
            RoundMessage::Partial { .. } => 4,
        }
    }

    /// Count and total size of the scheme-level objects carried: public keys,
    /// encrypted share bundles, ciphertexts, or partial decryptions.
    pub fn components(&self) -> (usize, usize) {
        match self {
            RoundMessage::Advertise(a) => (1, a.payload_len()),
            RoundMessage::Roster { entries, .. } => (entries.len(), entries.iter().map(Advert::payload_len).sum()),
            RoundMessage::Shares { bundles, .. } | RoundMessage::Routed { bundles } => {
                (bundles.len(), bundles.iter().map(|b| b.ciphertext.len()).sum())
            }
            RoundMessage::Cipher { cipher, .. } | RoundMessage::Evaluated { cipher } => (1, cipher.len()),
            RoundMessage::Partial { partial, .. } => (1, partial.len()),
            RoundMessage::CheckRelay { tx } => (1, tx.len()),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            RoundMessage::Advertise(a) => {
                w.u8(1);
                a.write(&mut w);
            }
            RoundMessage::Roster { esid, entries } => {
                w.u8(2);
                match esid {
                    Some(e) => w.u8(1).raw(e),
                    None => w.u8(0),
                };
                w.u32(entries.len() as u32);
                for a in entries {
                    a.write(&mut w);
                }
            }
            RoundMessage::Shares { user, bundles } => {
                w.u8(3).u32(*user).u32(bundles.len() as u32);
                for b in bundles {
                    b.write(&mut w);
                }
            }
            RoundMessage::Routed { bundles } => {
                w.u8(4).u32(bundles.len() as u32);
                for b in bundles {
                    b.write(&mut w);
                }
            }
            RoundMessage::Cipher { user, cipher } => {
                w.u8(5).u32(*user).blob(cipher);
            }
            RoundMessage::Evaluated { cipher } => {
                w.u8(6).blob(cipher);
            }
            RoundMessage::Partial { user, partial } => {
                w.u8(7).u32(*user).blob(partial);
            }
            RoundMessage::CheckRelay { tx } => {
                w.u8(8).blob(tx);
            }
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let bundles = |r: &mut Reader<'_>| -> Result<Vec<ShareBundle>> {
            let n = r.u32()? as usize;
            let mut out = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                out.push(ShareBundle::read(r)?);
            }
            Ok(out)
        };
        let msg = match r.u8()? {
            1 => RoundMessage::Advertise(Advert::read(&mut r)?),
            2 => {
                let esid = match r.u8()? {
                    0 => None,
                    1 => Some(r.array()?),
                    _ => return Err(format("bad esid flag")),
                };
                let n = r.u32()? as usize;
                let mut entries = Vec::with_capacity(n.min(1024));
                for _ in 0..n {
                    entries.push(Advert::read(&mut r)?);
                }
                RoundMessage::Roster { esid, entries }
            }
            3 => {
                let user = r.u32()?;
                RoundMessage::Shares { user, bundles: bundles(&mut r)? }
            }
            4 => RoundMessage::Routed { bundles: bundles(&mut r)? },
            5 => RoundMessage::Cipher { user: r.u32()?, cipher: r.blob()?.to_vec() },
            6 => RoundMessage::Evaluated { cipher: r.blob()?.to_vec() },
            7 => RoundMessage::Partial { user: r.u32()?, partial: r.blob()?.to_vec() },
            8 => RoundMessage::CheckRelay { tx: r.blob()?.to_vec() },
            tag => return Err(format(format!("unknown message tag {tag}"))),
        };
        r.finish()?;
        Ok(msg)
    }
}
