//! Share transport encryption, signatures, and a mock certificate issuer, all over P-256.
//!
//! The hybrid scheme is ECIES: an ephemeral P-256 key, HKDF-SHA256 over the
//! ECDH x-coordinate, and ChaCha20-Poly1305. Each message uses a fresh key, so
//! the AEAD nonce is fixed at zero.

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use p256::ecdsa::signature::{Signer, Verifier};
use p256::ecdsa::{Signature, SigningKey, VerifyingKey};
use p256::elliptic_curve::point::AffineCoordinates;
use p256::elliptic_curve::sec1::ToEncodedPoint;
use p256::{NonZeroScalar, ProjectivePoint, PublicKey};
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use crate::error::{format, Error, Result};
use crate::wire::{Reader, Writer};

/// Compressed SEC1 point length.
pub const POINT_LEN: usize = 33;
/// Fixed-width `r ‖ s` signature encoding.
pub const SIGNATURE_LEN: usize = 64;
/// Ephemeral point plus the Poly1305 tag.
pub const HYBRID_OVERHEAD: usize = POINT_LEN + 16;

const KDF_INFO: &[u8] = b"dtahe share transport v1";

#[derive(Clone)]
pub struct HybridSecretKey(NonZeroScalar);

impl std::fmt::Debug for HybridSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("HybridSecretKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HybridPublicKey([u8; POINT_LEN]);

impl HybridPublicKey {
    pub fn as_bytes(&self) -> &[u8; POINT_LEN] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let pk = PublicKey::from_sec1_bytes(bytes).map_err(|_| format("invalid hybrid public key"))?;
        let arr: [u8; POINT_LEN] =
            bytes.try_into().map_err(|_| format("hybrid public key must be 33 compressed bytes"))?;
        debug_assert_eq!(pk.to_encoded_point(true).as_bytes(), &arr);
        Ok(Self(arr))
    }

    fn point(&self) -> PublicKey {
        PublicKey::from_sec1_bytes(&self.0).expect("validated at construction")
    }
}

#[derive(Debug, Clone)]
pub struct HybridKeyPair {
    pub public: HybridPublicKey,
    pub secret: HybridSecretKey,
}

fn compress(p: &PublicKey) -> [u8; POINT_LEN] {
    p.to_encoded_point(true).as_bytes().try_into().expect("compressed point is 33 bytes")
}

pub fn hybrid_gen<R: RngCore + CryptoRng>(rng: &mut R) -> HybridKeyPair {
    let sk = NonZeroScalar::random(rng);
    let pk = PublicKey::from_secret_scalar(&sk);
    HybridKeyPair { public: HybridPublicKey(compress(&pk)), secret: HybridSecretKey(sk) }
}

fn derive_key(shared: &ProjectivePoint, ephemeral: &[u8; POINT_LEN], recipient: &[u8; POINT_LEN]) -> Key {
    let x = shared.to_affine().x();
    let hk = Hkdf::<Sha256>::new(None, &x);
    let mut info = Vec::with_capacity(KDF_INFO.len() + 2 * POINT_LEN);
    info.extend_from_slice(KDF_INFO);
    info.extend_from_slice(ephemeral);
    info.extend_from_slice(recipient);
    let mut okm = [0u8; 32];
    hk.expand(&info, &mut okm).expect("32 bytes is a valid HKDF output length");
    okm.into()
}

/// Output: ephemeral compressed point ‖ AEAD ciphertext ‖ tag.
pub fn hybrid_enc<R: RngCore + CryptoRng>(pk: &HybridPublicKey, plaintext: &[u8], rng: &mut R) -> Vec<u8> {
    let eph = NonZeroScalar::random(rng);
    let eph_pub = compress(&PublicKey::from_secret_scalar(&eph));
    let shared = pk.point().to_projective() * *eph;
    let key = derive_key(&shared, &eph_pub, &pk.0);
    let body = ChaCha20Poly1305::new(&key)
        .encrypt(&Nonce::default(), plaintext)
        .expect("in-memory AEAD encryption cannot fail");
    let mut out = Vec::with_capacity(POINT_LEN + body.len());
    out.extend_from_slice(&eph_pub);
    out.extend_from_slice(&body);
    out
}

pub fn hybrid_dec(kp: &HybridKeyPair, ciphertext: &[u8]) -> Result<Vec<u8>> {
    if ciphertext.len() < HYBRID_OVERHEAD {
        return Err(Error::Decryption);
    }
    let (eph, body) = ciphertext.split_at(POINT_LEN);
    let eph_point = PublicKey::from_sec1_bytes(eph).map_err(|_| Error::Decryption)?;
    let eph: [u8; POINT_LEN] = eph.try_into().expect("split at 33");
    let shared = eph_point.to_projective() * *kp.secret.0;
    let key = derive_key(&shared, &eph, &kp.public.0);
    ChaCha20Poly1305::new(&key).decrypt(&Nonce::default(), body).map_err(|_| Error::Decryption)
}

/// ECDSA signing key; deterministic nonces.
#[derive(Clone)]
pub struct SignKey(SigningKey);

impl std::fmt::Debug for SignKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SignKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerifyKey([u8; POINT_LEN]);

impl VerifyKey {
    pub fn as_bytes(&self) -> &[u8; POINT_LEN] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        VerifyingKey::from_sec1_bytes(bytes).map_err(|_| format("invalid verification key"))?;
        let arr = bytes.try_into().map_err(|_| format("verification key must be 33 compressed bytes"))?;
        Ok(Self(arr))
    }
}

pub fn sig_gen<R: RngCore + CryptoRng>(rng: &mut R) -> (SignKey, VerifyKey) {
    let sk = SigningKey::random(rng);
    let vk = sk.verifying_key().to_encoded_point(true);
    let vk = VerifyKey(vk.as_bytes().try_into().expect("compressed point is 33 bytes"));
    (SignKey(sk), vk)
}

impl SignKey {
    pub fn verify_key(&self) -> VerifyKey {
        let vk = self.0.verifying_key().to_encoded_point(true);
        VerifyKey(vk.as_bytes().try_into().expect("compressed point is 33 bytes"))
    }
}

pub fn sig_sign(sk: &SignKey, msg: &[u8]) -> [u8; SIGNATURE_LEN] {
    let sig: Signature = sk.0.sign(msg);
    sig.to_bytes().into()
}

/// Malformed keys or signatures yield `false`, as does any mismatch.
pub fn sig_verify(vk: &VerifyKey, msg: &[u8], sig: &[u8]) -> bool {
    let Ok(key) = VerifyingKey::from_sec1_bytes(&vk.0) else {
        return false;
    };
    let Ok(sig) = Signature::from_slice(sig) else {
        return false;
    };
    key.verify(msg, &sig).is_ok()
}

/// Binding of an identity to a verification key, signed by an issuer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub identity: Vec<u8>,
    pub key: VerifyKey,
    pub issuer: Vec<u8>,
    pub signature: [u8; SIGNATURE_LEN],
}

fn binding_message(identity: &[u8], key: &VerifyKey) -> Vec<u8> {
    let mut w = Writer::new();
    w.blob(identity).blob(key.as_bytes());
    w.finish()
}

impl Certificate {
    /// Length-prefixed identity, key, issuer, signature.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.blob(&self.identity).blob(self.key.as_bytes()).blob(&self.issuer).blob(&self.signature);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let cert = Self::read(&mut r)?;
        r.finish()?;
        Ok(cert)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let identity = r.blob()?.to_vec();
        let key = VerifyKey::from_bytes(r.blob()?)?;
        let issuer = r.blob()?.to_vec();
        let signature =
            r.blob()?.try_into().map_err(|_| format("certificate signature must be 64 bytes"))?;
        Ok(Self { identity, key, issuer, signature })
    }
}

/// Public half of a certificate issuer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuerKey {
    pub issuer: Vec<u8>,
    pub key: VerifyKey,
}

/// Single in-process certificate issuer.
#[derive(Debug, Clone)]
pub struct MockCa {
    issuer: Vec<u8>,
    key: SignKey,
}

impl MockCa {
    pub fn new<R: RngCore + CryptoRng>(issuer: impl Into<Vec<u8>>, rng: &mut R) -> Self {
        let (key, _) = sig_gen(rng);
        Self { issuer: issuer.into(), key }
    }

    pub fn public(&self) -> IssuerKey {
        IssuerKey { issuer: self.issuer.clone(), key: self.key.verify_key() }
    }

    pub fn issue(&self, identity: &[u8], vk: &VerifyKey) -> Certificate {
        Certificate {
            identity: identity.to_vec(),
            key: *vk,
            issuer: self.issuer.clone(),
            signature: sig_sign(&self.key, &binding_message(identity, vk)),
        }
    }
}

pub fn cert_verify(cert: &Certificate, ca: &IssuerKey) -> bool {
    cert.issuer == ca.issuer && sig_verify(&ca.key, &binding_message(&cert.identity, &cert.key), &cert.signature)
}
