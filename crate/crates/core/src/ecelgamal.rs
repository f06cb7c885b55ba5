//! Exponent ElGamal over P-256 as a threshold additive scheme.
//!
//! Each data element is encrypted separately as `(r·G, r·pk + m·G)`. Users
//! Shamir-share their secret scalar over the group order; decryption recovers
//! `M·G` and solves the small discrete log with baby-step giant-step.

use std::collections::HashMap;
use std::sync::Arc;

use p256::elliptic_curve::ff::Field;
use p256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use p256::elliptic_curve::group::Group;
use p256::elliptic_curve::PrimeField;
use p256::{AffinePoint, EncodedPoint, ProjectivePoint, Scalar};
use rand::{CryptoRng, RngCore};

use crate::crypto::{hybrid_dec, hybrid_enc, hybrid_gen, HybridKeyPair, HybridPublicKey, POINT_LEN};
use crate::error::{format, param, Error, Result};
use crate::lattice::check_ordinals;
use crate::scheme::ShareBundle;
use crate::shamir::{lagrange_coeffs, ss_split, Share, ShareField};
use crate::wire::{Reader, Writer};

/// Default decode bound `2^32`.
pub const DEFAULT_DECODE_BOUND: u64 = 1 << 32;
/// Default baby-step table size `2^16`.
pub const DEFAULT_TABLE_SIZE: u64 = 1 << 16;

/// The P-256 scalar field `Z_q`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarField;

impl ShareField for ScalarField {
    type Elem = Scalar;

    fn zero(&self) -> Scalar {
        Scalar::ZERO
    }

    fn from_u64(&self, v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        a + b
    }

    fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        a - b
    }

    fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        a * b
    }

    fn inv(&self, a: Scalar) -> Option<Scalar> {
        a.invert().into()
    }

    fn random<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar::random(rng)
    }

    fn supports_parties(&self, _n: usize) -> bool {
        true
    }
}

/// 33-byte compressed encoding; the identity is 33 zero bytes.
pub fn encode_point(p: &AffinePoint) -> [u8; POINT_LEN] {
    let enc = p.to_encoded_point(true);
    let mut out = [0u8; POINT_LEN];
    if enc.as_bytes().len() == POINT_LEN {
        out.copy_from_slice(enc.as_bytes());
    }
    out
}

pub fn decode_point(bytes: &[u8]) -> Result<ProjectivePoint> {
    if bytes.len() != POINT_LEN {
        return Err(format(format!("point encoding of {} bytes", bytes.len())));
    }
    if bytes.iter().all(|&b| b == 0) {
        return Ok(ProjectivePoint::IDENTITY);
    }
    let enc = EncodedPoint::from_bytes(bytes).map_err(|_| format("invalid point encoding"))?;
    Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&enc))
        .map(ProjectivePoint::from)
        .ok_or_else(|| format("point not on curve"))
}

fn encode_points(points: &[ProjectivePoint], w: &mut Writer) {
    for p in points {
        w.raw(&encode_point(&p.to_affine()));
    }
}

/// Variable-time double-and-add for small public multipliers.
pub fn mul_small(p: &ProjectivePoint, k: u64) -> ProjectivePoint {
    let mut acc = ProjectivePoint::IDENTITY;
    for bit in (0..64 - k.leading_zeros()).rev() {
        acc = acc.double();
        if (k >> bit) & 1 == 1 {
            acc += p;
        }
    }
    acc
}

/// Baby-step table `{j·G : 0 ≤ j < m}` plus the giant stride `m·G`.
pub struct BsgsTable {
    baby: HashMap<[u8; POINT_LEN], u32>,
    size: u64,
    stride: ProjectivePoint,
}

impl std::fmt::Debug for BsgsTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BsgsTable").field("size", &self.size).finish_non_exhaustive()
    }
}

impl BsgsTable {
    pub fn new(size: u64) -> Result<Self> {
        if size == 0 || size > u32::MAX as u64 {
            return Err(param(format!("baby-step table size {size} out of range")));
        }
        let mut points = Vec::with_capacity(size as usize);
        let mut acc = ProjectivePoint::IDENTITY;
        for _ in 0..size {
            points.push(acc);
            acc += ProjectivePoint::GENERATOR;
        }
        let baby = points.iter().enumerate().map(|(j, p)| (encode_point(&p.to_affine()), j as u32)).collect();
        Ok(Self { baby, size, stride: acc })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Finds `m < bound` with `P = m·G` in `O(m / size + 1)` giant steps.
    pub fn decode(&self, p: &ProjectivePoint, bound: u64) -> Result<u64> {
        let giants = bound.div_ceil(self.size);
        let mut cur = *p;
        for i in 0..giants {
            if let Some(&j) = self.baby.get(&encode_point(&cur.to_affine())) {
                let m = i * self.size + j as u64;
                if m < bound {
                    return Ok(m);
                }
                return Err(Error::Range(format!("discrete log {m} not below bound {bound}")));
            }
            cur -= self.stride;
        }
        Err(Error::Range(format!("no discrete log below {bound}; aggregate overflow")))
    }
}

/// `bsgs_decode(P, bound)` with a fresh `⌈√bound⌉` table.
pub fn bsgs_decode(p: &ProjectivePoint, bound: u64) -> Result<u64> {
    let size = (bound as f64).sqrt().ceil().max(1.0) as u64;
    BsgsTable::new(size)?.decode(p, bound)
}

#[derive(Debug, Clone)]
pub struct EcParams {
    dim: usize,
    plain_modulus: u64,
    bound: u64,
    table: Arc<BsgsTable>,
}

impl EcParams {
    pub fn new(dim: usize, plain_modulus: u64, bound: u64, table_size: u64) -> Result<Self> {
        if dim == 0 {
            return Err(param("message dimension must be positive"));
        }
        if bound == 0 {
            return Err(param("decode bound must be positive"));
        }
        Ok(Self { dim, plain_modulus, bound, table: Arc::new(BsgsTable::new(table_size)?) })
    }

    pub fn with_defaults(dim: usize) -> Result<Self> {
        Self::new(dim, crate::ring::DEFAULT_PLAIN_MODULUS, DEFAULT_DECODE_BOUND, DEFAULT_TABLE_SIZE)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn plain_modulus(&self) -> u64 {
        self.plain_modulus
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn table(&self) -> &BsgsTable {
        &self.table
    }
}

#[derive(Debug, Clone)]
pub struct EcKeyPair {
    pub secret: Scalar,
    pub public: ProjectivePoint,
    pub transport: HybridKeyPair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcPublicKey {
    pub point: ProjectivePoint,
    pub transport: HybridPublicKey,
}

impl EcKeyPair {
    pub fn public_key(&self) -> EcPublicKey {
        EcPublicKey { point: self.public, transport: self.transport.public }
    }
}

impl EcPublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = encode_point(&self.point.to_affine()).to_vec();
        out.extend_from_slice(self.transport.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let point = decode_point(r.raw(POINT_LEN)?)?;
        let transport = HybridPublicKey::from_bytes(r.raw(POINT_LEN)?)?;
        r.finish()?;
        Ok(Self { point, transport })
    }
}

pub fn ec_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> EcKeyPair {
    let secret = Scalar::random(&mut *rng);
    EcKeyPair { secret, public: ProjectivePoint::GENERATOR * secret, transport: hybrid_gen(rng) }
}

/// Bundle plaintext: index u32 ‖ 32-byte big-endian scalar.
fn encode_share(s: &Share<Scalar>) -> Vec<u8> {
    let mut w = Writer::with_capacity(36);
    w.u32(s.index).raw(&s.value.to_bytes());
    w.finish()
}

fn decode_share(bytes: &[u8]) -> Result<Share<Scalar>> {
    let mut r = Reader::new(bytes);
    let index = r.u32()?;
    let raw: [u8; 32] = r.array()?;
    r.finish()?;
    let value = Option::<Scalar>::from(Scalar::from_repr(raw.into())).ok_or_else(|| format("share scalar not reduced"))?;
    Ok(Share { index, value })
}

/// Shares `x_u` among ordinals `1..=n`; returns the peer bundles and the dealer's own share.
pub fn ec_share<R: RngCore + CryptoRng>(
    own_index: u32,
    peers: &[(u32, HybridPublicKey)],
    t: usize,
    kp: &EcKeyPair,
    rng: &mut R,
) -> Result<(Vec<ShareBundle>, Share<Scalar>)> {
    let n = peers.len() + 1;
    if t > n {
        return Err(Error::Threshold { needed: t, have: n });
    }
    check_ordinals(own_index, peers.iter().map(|p| p.0), n)?;
    let shares = ss_split(&ScalarField, kp.secret, n, t, rng)?;
    let bundles = peers
        .iter()
        .map(|(idx, pk)| ShareBundle {
            sender: own_index,
            recipient: *idx,
            ciphertext: hybrid_enc(pk, &encode_share(&shares[*idx as usize - 1]), rng),
        })
        .collect();
    Ok((bundles, shares[own_index as usize - 1]))
}

pub fn ec_combkey(keys: &[&ProjectivePoint]) -> Result<ProjectivePoint> {
    if keys.is_empty() {
        return Err(param("no public keys to combine"));
    }
    Ok(keys.iter().fold(ProjectivePoint::IDENTITY, |acc, k| acc + *k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcCiphertext {
    pub pairs: Vec<(ProjectivePoint, ProjectivePoint)>,
}

impl EcCiphertext {
    /// `C₀ ‖ C₁` per element, 66 bytes each.
    pub fn to_bytes(&self) -> Vec<u8> {
        let flat: Vec<ProjectivePoint> = self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let mut w = Writer::with_capacity(flat.len() * POINT_LEN);
        encode_points(&flat, &mut w);
        w.finish()
    }

    pub fn from_bytes(params: &EcParams, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != params.dim * 2 * POINT_LEN {
            return Err(format(format!("ciphertext of {} bytes for dimension {}", bytes.len(), params.dim)));
        }
        let pairs = bytes
            .chunks_exact(2 * POINT_LEN)
            .map(|c| Ok((decode_point(&c[..POINT_LEN])?, decode_point(&c[POINT_LEN..])?)))
            .collect::<Result<_>>()?;
        Ok(Self { pairs })
    }
}

pub fn ec_enc<R: RngCore + CryptoRng>(
    params: &EcParams,
    pk: &ProjectivePoint,
    data: &[u64],
    rng: &mut R,
) -> Result<EcCiphertext> {
    if data.len() != params.dim {
        return Err(Error::Dimension(format!("message length {} vs dimension {}", data.len(), params.dim)));
    }
    if let Some(bad) = data.iter().find(|&&v| v >= params.plain_modulus) {
        return Err(Error::Range(format!("datum {bad} not below {}", params.plain_modulus)));
    }
    let pairs = data
        .iter()
        .map(|&m| {
            let r = Scalar::random(&mut *rng);
            (ProjectivePoint::GENERATOR * r, *pk * r + mul_small(&ProjectivePoint::GENERATOR, m))
        })
        .collect();
    Ok(EcCiphertext { pairs })
}

pub fn ec_eval(params: &EcParams, cts: &[&EcCiphertext], alphas: &[u64]) -> Result<EcCiphertext> {
    if cts.is_empty() {
        return Err(param("no ciphertexts to evaluate"));
    }
    if cts.len() != alphas.len() {
        return Err(Error::Dimension(format!("{} ciphertexts but {} coefficients", cts.len(), alphas.len())));
    }
    if let Some(c) = cts.iter().find(|c| c.pairs.len() != params.dim) {
        return Err(Error::Dimension(format!("ciphertext of {} elements", c.pairs.len())));
    }
    let pairs = (0..params.dim)
        .map(|i| {
            cts.iter().zip(alphas).fold((ProjectivePoint::IDENTITY, ProjectivePoint::IDENTITY), |(a, b), (c, &k)| {
                let (c0, c1) = c.pairs[i];
                (a + mul_small(&c0, k), b + mul_small(&c1, k))
            })
        })
        .collect();
    Ok(EcCiphertext { pairs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcPartial {
    pub index: u32,
    pub points: Vec<ProjectivePoint>,
}

impl EcPartial {
    /// index u32 ‖ 33 bytes per element.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(4 + self.points.len() * POINT_LEN);
        w.u32(self.index);
        encode_points(&self.points, &mut w);
        w.finish()
    }

    pub fn from_bytes(params: &EcParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let index = r.u32()?;
        let points = (0..params.dim).map(|_| decode_point(r.raw(POINT_LEN)?)).collect::<Result<_>>()?;
        r.finish()?;
        Ok(Self { index, points })
    }
}

/// Opens the bundles addressed to `own_index` and adds the retained share.
pub fn ec_collect_shares(
    own_index: u32,
    bundles: &[ShareBundle],
    retained: &Share<Scalar>,
    transport: &HybridKeyPair,
) -> Result<Scalar> {
    if retained.index != own_index {
        return Err(Error::Transport(format!("retained share is for party {}", retained.index)));
    }
    let mut sum = retained.value;
    for b in bundles {
        if b.recipient != own_index {
            return Err(Error::Transport(format!("bundle from {} addressed to {}", b.sender, b.recipient)));
        }
        let plain = hybrid_dec(transport, &b.ciphertext)
            .map_err(|_| Error::Transport(format!("cannot open bundle from {}", b.sender)))?;
        let s = decode_share(&plain)?;
        if s.index != own_index {
            return Err(Error::Transport(format!("share from {} is for party {}", b.sender, s.index)));
        }
        sum += s.value;
    }
    Ok(sum)
}

/// `d_{u,i} = (Σ_v share_v)·C₀ᵢ`.
pub fn ec_pardec_from_share(ct: &EcCiphertext, index: u32, share_sum: &Scalar) -> EcPartial {
    EcPartial { index, points: ct.pairs.iter().map(|(c0, _)| *c0 * share_sum).collect() }
}

pub fn ec_pardec(
    ct: &EcCiphertext,
    own_index: u32,
    bundles: &[ShareBundle],
    retained: &Share<Scalar>,
    transport: &HybridKeyPair,
) -> Result<EcPartial> {
    let s = ec_collect_shares(own_index, bundles, retained, transport)?;
    Ok(ec_pardec_from_share(ct, own_index, &s))
}

/// `M·G = C₁ − Σ li_u·d_u` per element, then baby-step giant-step.
pub fn ec_findec(params: &EcParams, t: usize, ct: &EcCiphertext, partials: &[EcPartial]) -> Result<Vec<u64>> {
    let masks = ec_unmask(t, ct, partials)?;
    masks.iter().map(|p| params.table.decode(p, params.bound)).collect()
}

/// The Lagrange-combination half of [`ec_findec`], returning `M·G` per element.
pub fn ec_unmask(t: usize, ct: &EcCiphertext, partials: &[EcPartial]) -> Result<Vec<ProjectivePoint>> {
    if partials.len() < t {
        return Err(Error::Threshold { needed: t, have: partials.len() });
    }
    if let Some(p) = partials.iter().find(|p| p.points.len() != ct.pairs.len()) {
        return Err(Error::Dimension(format!("partial from {} has {} elements", p.index, p.points.len())));
    }
    let indices: Vec<u32> = partials.iter().map(|p| p.index).collect();
    let li = lagrange_coeffs(&ScalarField, &indices)?;
    Ok(ct
        .pairs
        .iter()
        .enumerate()
        .map(|(i, (_, c1))| partials.iter().zip(&li).fold(*c1, |acc, (p, l)| acc - p.points[i] * l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shamir::ss_recover;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn small_params(dim: usize) -> EcParams {
        EcParams::new(dim, 65537, 1 << 20, 1 << 10).unwrap()
    }

    struct Party {
        kp: EcKeyPair,
        bundles: Vec<ShareBundle>,
        own: Share<Scalar>,
    }

    fn deal(n: usize, t: usize, rng: &mut ChaCha20Rng) -> Vec<Party> {
        let kps: Vec<_> = (0..n).map(|_| ec_keygen(rng)).collect();
        (0..n)
            .map(|i| {
                let peers: Vec<_> = (0..n).filter(|&j| j != i).map(|j| (j as u32 + 1, kps[j].transport.public)).collect();
                let (bundles, own) = ec_share(i as u32 + 1, &peers, t, &kps[i], rng).unwrap();
                Party { kp: kps[i].clone(), bundles, own }
            })
            .collect()
    }

    fn partial(parties: &[Party], ct: &EcCiphertext, idx: u32) -> EcPartial {
        let inbox: Vec<_> = parties.iter().flat_map(|p| p.bundles.iter().filter(|b| b.recipient == idx).cloned()).collect();
        let me = &parties[idx as usize - 1];
        ec_pardec(ct, idx, &inbox, &me.own, &me.kp.transport).unwrap()
    }

    #[test]
    fn point_encoding() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(encode_point(&AffinePoint::IDENTITY), [0u8; 33]);
        assert_eq!(decode_point(&[0u8; 33]).unwrap(), ProjectivePoint::IDENTITY);
        for _ in 0..50 {
            let p = ProjectivePoint::GENERATOR * Scalar::random(&mut rng);
            let enc = encode_point(&p.to_affine());
            assert!(enc[0] == 2 || enc[0] == 3);
            assert_eq!(decode_point(&enc).unwrap(), p);
        }
        assert!(decode_point(&[2u8; 32]).is_err());
    }

    #[test]
    fn small_multiplication_matches_scalar() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = ProjectivePoint::GENERATOR * Scalar::random(&mut rng);
        for k in [0u64, 1, 2, 255, 65536, u64::MAX] {
            assert_eq!(mul_small(&p, k), p * Scalar::from(k));
        }
    }

    #[test]
    fn bsgs_examples() {
        let table = BsgsTable::new(1 << 10).unwrap();
        assert_eq!(table.decode(&ProjectivePoint::IDENTITY, 1 << 20).unwrap(), 0);
        assert_eq!(table.decode(&ProjectivePoint::GENERATOR, 1 << 20).unwrap(), 1);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = rng.gen_range(0..1u64 << 20);
            assert_eq!(table.decode(&mul_small(&ProjectivePoint::GENERATOR, m), 1 << 20).unwrap(), m);
        }
        let over = mul_small(&ProjectivePoint::GENERATOR, 1 << 20);
        assert!(matches!(table.decode(&over, 1 << 20), Err(Error::Range(_))));
        assert_eq!(bsgs_decode(&mul_small(&ProjectivePoint::GENERATOR, 999), 1000).unwrap(), 999);
        assert!(bsgs_decode(&mul_small(&ProjectivePoint::GENERATOR, 1000), 1000).is_err());
    }

    #[test]
    fn combkey_and_reconstruction() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let parties = deal(4, 3, &mut rng);
        let k0 = parties[0].kp.public;
        assert_eq!(ec_combkey(&[&k0]).unwrap(), k0);
        let neg = -k0;
        assert_eq!(ec_combkey(&[&k0, &neg]).unwrap(), ProjectivePoint::IDENTITY);
        let pk = ec_combkey(&parties.iter().map(|p| &p.kp.public).collect::<Vec<_>>()).unwrap();
        // sum of every party's aggregated share, any 3 of them, interpolates Σ x_u
        let sums: Vec<Share<Scalar>> = (1..=4u32)
            .map(|i| {
                let inbox: Vec<_> = parties.iter().flat_map(|p| p.bundles.iter().filter(|b| b.recipient == i).cloned()).collect();
                let me = &parties[i as usize - 1];
                Share { index: i, value: ec_collect_shares(i, &inbox, &me.own, &me.kp.transport).unwrap() }
            })
            .collect();
        let x = ss_recover(&ScalarField, &sums[1..], 3).unwrap();
        assert_eq!(ProjectivePoint::GENERATOR * x, pk);
    }

    #[test]
    fn threshold_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let params = small_params(3);
        let parties = deal(3, 2, &mut rng);
        let pk = ec_combkey(&parties.iter().map(|p| &p.kp.public).collect::<Vec<_>>()).unwrap();
        let cts: Vec<_> = [[1u64, 0, 5], [2, 0, 6], [3, 0, 7]]
            .iter()
            .map(|m| ec_enc(&params, &pk, m, &mut rng).unwrap())
            .collect();
        let refs: Vec<_> = cts.iter().collect();
        let ct = ec_eval(&params, &refs, &[1, 1, 1]).unwrap();
        let mut outs = Vec::new();
        for pair in [[1u32, 2], [2, 3], [1, 3]] {
            let parts: Vec<_> = pair.iter().map(|&i| partial(&parties, &ct, i)).collect();
            outs.push(ec_findec(&params, 2, &ct, &parts).unwrap());
        }
        assert!(outs.iter().all(|o| o == &vec![6, 0, 18]));

        let weighted = ec_eval(&params, &refs[..2], &[2, 3]).unwrap();
        let parts: Vec<_> = [1u32, 3].iter().map(|&i| partial(&parties, &weighted, i)).collect();
        assert_eq!(ec_findec(&params, 2, &weighted, &parts).unwrap(), vec![8, 0, 28]);

        let zero = ec_eval(&params, &refs, &[0, 0, 0]).unwrap();
        assert!(zero.pairs.iter().all(|&(a, b)| a == ProjectivePoint::IDENTITY && b == ProjectivePoint::IDENTITY));

        let single = [partial(&parties, &ct, 1)];
        assert_eq!(ec_findec(&params, 2, &ct, &single), Err(Error::Threshold { needed: 2, have: 1 }));
        assert!(ec_eval(&params, &[], &[]).is_err());
    }

    #[test]
    fn zero_message_and_wire_formats() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let params = small_params(4);
        let parties = deal(3, 3, &mut rng);
        let pk = ec_combkey(&parties.iter().map(|p| &p.kp.public).collect::<Vec<_>>()).unwrap();
        let ct = ec_enc(&params, &pk, &[0; 4], &mut rng).unwrap();
        let ct = ec_eval(&params, &[&ct], &[1]).unwrap();
        let bytes = ct.to_bytes();
        assert_eq!(bytes.len(), 66 * 4);
        assert_eq!(EcCiphertext::from_bytes(&params, &bytes).unwrap(), ct);
        let parts: Vec<_> = (1..=3).map(|i| partial(&parties, &ct, i)).collect();
        assert_eq!(EcPartial::from_bytes(&params, &parts[0].to_bytes()).unwrap(), parts[0]);
        assert!(ec_unmask(3, &ct, &parts).unwrap().iter().all(|p| *p == ProjectivePoint::IDENTITY));
        assert_eq!(ec_findec(&params, 3, &ct, &parts).unwrap(), vec![0; 4]);
        let key = parties[0].kp.public_key();
        assert_eq!(EcPublicKey::from_bytes(&key.to_bytes()).unwrap(), key);
        assert!(ec_enc(&params, &pk, &[65537, 0, 0, 0], &mut rng).is_err());
    }
}
