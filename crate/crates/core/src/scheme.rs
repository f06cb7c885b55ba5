//! The algorithm suite shared by both threshold schemes, so the protocol and
//! contract can run either one.

use std::fmt;
use std::sync::Arc;

use p256::{ProjectivePoint, Scalar};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::crypto::HybridPublicKey;
use crate::ecelgamal::{self as ec, EcCiphertext, EcKeyPair, EcParams, EcPartial, EcPublicKey};
use crate::error::Result;
use crate::lattice::{self, Ciphertext, LatticeKeyPair, LatticeParams, LatticePublicKey, PartialDecryption};
use crate::shamir::{Share, ShareVector};
use crate::wire::{Reader, Writer};

/// Encrypted shares from `sender` to `recipient`, both roster ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    pub sender: u32,
    pub recipient: u32,
    pub ciphertext: Vec<u8>,
}

impl ShareBundle {
    pub fn write(&self, w: &mut Writer) {
        w.u32(self.sender).u32(self.recipient).blob(&self.ciphertext);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { sender: r.u32()?, recipient: r.u32()?, ciphertext: r.blob()?.to_vec() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Lattice,
    EcElgamal,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Lattice => "lattice",
            SchemeKind::EcElgamal => "ec_elgamal",
        })
    }
}

/// Setup, KeyGen, Share, CombKey, Enc, Eval, ParDec, FinDec plus wire codecs.
pub trait Scheme: Send + Sync + 'static {
    type KeyPair: Clone + Send + Sync;
    type PublicKey: Clone + PartialEq + Send + Sync;
    type CombinedKey: Clone + Send + Sync;
    type Ciphertext: Clone + PartialEq + Send + Sync;
    type Retained: Clone + Send + Sync;
    type Partial: Clone + Send + Sync;

    fn kind(&self) -> SchemeKind;
    fn dim(&self) -> usize;

    fn keygen<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Self::KeyPair;
    fn public_key(&self, kp: &Self::KeyPair) -> Self::PublicKey;
    fn transport_key(&self, pk: &Self::PublicKey) -> HybridPublicKey;
    fn share<R: RngCore + CryptoRng>(
        &self,
        kp: &Self::KeyPair,
        own_index: u32,
        peers: &[(u32, HybridPublicKey)],
        t: usize,
        rng: &mut R,
    ) -> Result<(Vec<ShareBundle>, Self::Retained)>;
    fn combine_keys(&self, keys: &[&Self::PublicKey]) -> Result<Self::CombinedKey>;
    fn encrypt<R: RngCore + CryptoRng>(&self, pk: &Self::CombinedKey, data: &[u64], rng: &mut R) -> Result<Self::Ciphertext>;
    fn eval(&self, cts: &[&Self::Ciphertext], alphas: &[u64]) -> Result<Self::Ciphertext>;
    fn pardec(
        &self,
        ct: &Self::Ciphertext,
        kp: &Self::KeyPair,
        own_index: u32,
        bundles: &[ShareBundle],
        retained: &Self::Retained,
    ) -> Result<Self::Partial>;
    fn findec(&self, t: usize, ct: &Self::Ciphertext, partials: &[Self::Partial]) -> Result<Vec<u64>>;

    fn partial_index(&self, p: &Self::Partial) -> u32;
    fn encode_public_key(&self, pk: &Self::PublicKey) -> Vec<u8>;
    fn decode_public_key(&self, bytes: &[u8]) -> Result<Self::PublicKey>;
    fn encode_ciphertext(&self, ct: &Self::Ciphertext) -> Vec<u8>;
    fn decode_ciphertext(&self, bytes: &[u8]) -> Result<Self::Ciphertext>;
    fn encode_partial(&self, p: &Self::Partial) -> Vec<u8>;
    fn decode_partial(&self, bytes: &[u8]) -> Result<Self::Partial>;
}

/// The ring-LWE scheme.
#[derive(Debug, Clone)]
pub struct LatticeScheme {
    pub params: Arc<LatticeParams>,
}

impl LatticeScheme {
    pub fn new(params: LatticeParams) -> Self {
        Self { params: Arc::new(params) }
    }
}

impl Scheme for LatticeScheme {
    type KeyPair = LatticeKeyPair;
    type PublicKey = LatticePublicKey;
    type CombinedKey = crate::ring::RingElement;
    type Ciphertext = Ciphertext;
    type Retained = ShareVector;
    type Partial = PartialDecryption;

    fn kind(&self) -> SchemeKind {
        SchemeKind::Lattice
    }

    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn keygen<R: RngCore + CryptoRng>(&self, rng: &mut R) -> LatticeKeyPair {
        lattice::keygen(&self.params, rng)
    }

    fn public_key(&self, kp: &LatticeKeyPair) -> LatticePublicKey {
        kp.public()
    }

    fn transport_key(&self, pk: &LatticePublicKey) -> HybridPublicKey {
        pk.transport
    }

    fn share<R: RngCore + CryptoRng>(
        &self,
        kp: &LatticeKeyPair,
        own_index: u32,
        peers: &[(u32, HybridPublicKey)],
        t: usize,
        rng: &mut R,
    ) -> Result<(Vec<ShareBundle>, ShareVector)> {
        let out = lattice::share(&self.params, own_index, peers, t, kp, rng)?;
        Ok((out.bundles, out.retained))
    }

    fn combine_keys(&self, keys: &[&LatticePublicKey]) -> Result<crate::ring::RingElement> {
        let pks: Vec<_> = keys.iter().map(|k| &k.pk0).collect();
        lattice::combkey(&self.params, &pks)
    }

    fn encrypt<R: RngCore + CryptoRng>(&self, pk: &crate::ring::RingElement, data: &[u64], rng: &mut R) -> Result<Ciphertext> {
        let pt = lattice::encode(&self.params, data)?;
        lattice::enc(&self.params, pk, &pt, rng)
    }

    fn eval(&self, cts: &[&Ciphertext], alphas: &[u64]) -> Result<Ciphertext> {
        lattice::eval(&self.params, cts, alphas)
    }

    fn pardec(
        &self,
        ct: &Ciphertext,
        kp: &LatticeKeyPair,
        own_index: u32,
        bundles: &[ShareBundle],
        retained: &ShareVector,
    ) -> Result<PartialDecryption> {
        lattice::pardec(&self.params, ct, own_index, bundles, retained, &kp.transport)
    }

    fn findec(&self, t: usize, ct: &Ciphertext, partials: &[PartialDecryption]) -> Result<Vec<u64>> {
        lattice::findec(&self.params, t, ct, partials)
    }

    fn partial_index(&self, p: &PartialDecryption) -> u32 {
        p.index
    }

    fn encode_public_key(&self, pk: &LatticePublicKey) -> Vec<u8> {
        pk.to_bytes()
    }

    fn decode_public_key(&self, bytes: &[u8]) -> Result<LatticePublicKey> {
        LatticePublicKey::from_bytes(&self.params, bytes)
    }

    fn encode_ciphertext(&self, ct: &Ciphertext) -> Vec<u8> {
        ct.to_bytes()
    }

    fn decode_ciphertext(&self, bytes: &[u8]) -> Result<Ciphertext> {
        Ciphertext::from_bytes(&self.params, bytes)
    }

    fn encode_partial(&self, p: &PartialDecryption) -> Vec<u8> {
        p.to_bytes()
    }

    fn decode_partial(&self, bytes: &[u8]) -> Result<PartialDecryption> {
        PartialDecryption::from_bytes(&self.params, bytes)
    }
}

/// Exponent ElGamal over P-256.
#[derive(Debug, Clone)]
pub struct EcScheme {
    pub params: Arc<EcParams>,
}

impl EcScheme {
    pub fn new(params: EcParams) -> Self {
        Self { params: Arc::new(params) }
    }
}

impl Scheme for EcScheme {
    type KeyPair = EcKeyPair;
    type PublicKey = EcPublicKey;
    type CombinedKey = ProjectivePoint;
    type Ciphertext = EcCiphertext;
    type Retained = Share<Scalar>;
    type Partial = EcPartial;

    fn kind(&self) -> SchemeKind {
        SchemeKind::EcElgamal
    }

    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn keygen<R: RngCore + CryptoRng>(&self, rng: &mut R) -> EcKeyPair {
        ec::ec_keygen(rng)
    }

    fn public_key(&self, kp: &EcKeyPair) -> EcPublicKey {
        kp.public_key()
    }

    fn transport_key(&self, pk: &EcPublicKey) -> HybridPublicKey {
        pk.transport
    }

    fn share<R: RngCore + CryptoRng>(
        &self,
        kp: &EcKeyPair,
        own_index: u32,
        peers: &[(u32, HybridPublicKey)],
        t: usize,
        rng: &mut R,
    ) -> Result<(Vec<ShareBundle>, Share<Scalar>)> {
        ec::ec_share(own_index, peers, t, kp, rng)
    }

    fn combine_keys(&self, keys: &[&EcPublicKey]) -> Result<ProjectivePoint> {
        let pts: Vec<_> = keys.iter().map(|k| &k.point).collect();
        ec::ec_combkey(&pts)
    }

    fn encrypt<R: RngCore + CryptoRng>(&self, pk: &ProjectivePoint, data: &[u64], rng: &mut R) -> Result<EcCiphertext> {
        ec::ec_enc(&self.params, pk, data, rng)
    }

    fn eval(&self, cts: &[&EcCiphertext], alphas: &[u64]) -> Result<EcCiphertext> {
        ec::ec_eval(&self.params, cts, alphas)
    }

    fn pardec(
        &self,
        ct: &EcCiphertext,
        kp: &EcKeyPair,
        own_index: u32,
        bundles: &[ShareBundle],
        retained: &Share<Scalar>,
    ) -> Result<EcPartial> {
        ec::ec_pardec(ct, own_index, bundles, retained, &kp.transport)
    }

    fn findec(&self, t: usize, ct: &EcCiphertext, partials: &[EcPartial]) -> Result<Vec<u64>> {
        ec::ec_findec(&self.params, t, ct, partials)
    }

    fn partial_index(&self, p: &EcPartial) -> u32 {
        p.index
    }

    fn encode_public_key(&self, pk: &EcPublicKey) -> Vec<u8> {
        pk.to_bytes()
    }

    fn decode_public_key(&self, bytes: &[u8]) -> Result<EcPublicKey> {
        EcPublicKey::from_bytes(bytes)
    }

    fn encode_ciphertext(&self, ct: &EcCiphertext) -> Vec<u8> {
        ct.to_bytes()
    }

    fn decode_ciphertext(&self, bytes: &[u8]) -> Result<EcCiphertext> {
        EcCiphertext::from_bytes(&self.params, bytes)
    }

    fn encode_partial(&self, p: &EcPartial) -> Vec<u8> {
        p.to_bytes()
    }

    fn decode_partial(&self, bytes: &[u8]) -> Result<EcPartial> {
        EcPartial::from_bytes(&self.params, bytes)
    }
}
