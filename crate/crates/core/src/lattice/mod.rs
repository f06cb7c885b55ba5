//! Ring-LWE threshold additive encryption.
//!
//! Keys are `pk₀ = [-(a·s + e)]_h` with ternary `s`. Each user Shamir-shares
//! its secret `s` together with one smoothing-noise polynomial per ciphertext
//! block, so any `t` users can jointly strip `ĉ₀·Σs` from an evaluated
//! ciphertext without anyone learning `Σs`.

pub mod oracle;

use std::sync::Arc;

use rand::{CryptoRng, RngCore};

use crate::crypto::{hybrid_dec, hybrid_enc, hybrid_gen, HybridKeyPair, HybridPublicKey, POINT_LEN};
use crate::error::{param, Error, Result};
use crate::ring::{
    modular, reduce_centered, ring_linear, round_scale, Distribution, LinearCoeff, Params, RingElement,
    DEFAULT_NOISE_BOUND, DEFAULT_PLAIN_MODULUS, DEFAULT_SIGMA,
};
use crate::scheme::ShareBundle;
use crate::shamir::{lagrange_coeffs, split_ring, ShareField, ShareVector, ZModPrime};
use crate::wire::{Reader, Writer};

/// Default ring degree.
pub const DEFAULT_DEGREE: usize = 2048;
/// Default ciphertext modulus size in bits.
pub const DEFAULT_MODULUS_BITS: u32 = 54;
/// Default bound on evaluation coefficients (8-bit weights).
pub const DEFAULT_MAX_COEFFICIENT: u64 = 255;

/// Ring parameters plus the message layout.
#[derive(Debug, Clone)]
pub struct LatticeParams {
    ring: Params,
    dim: usize,
    blocks: usize,
    max_coefficient: u64,
    field: ZModPrime,
}

/// Chooses the smallest prime `h ≥ 2^(bits-1)` with `h ≡ 1 mod 2d` and samples `a`.
pub fn setup<R: RngCore + CryptoRng>(
    lambda: u32,
    degree: usize,
    modulus_bits: u32,
    plain_modulus: u64,
    dim: usize,
    rng: &mut R,
) -> Result<LatticeParams> {
    if degree < 2 || !degree.is_power_of_two() {
        return Err(param(format!("ring degree {degree} is not a power of two")));
    }
    let h = modular::find_congruent_prime(modulus_bits, 2 * degree as u64)?;
    let ring = Params::generate(lambda, degree, h, plain_modulus, DEFAULT_SIGMA, DEFAULT_NOISE_BOUND, rng)?;
    LatticeParams::new(ring, dim)
}

/// [`setup`] with the default 128-bit parameter set.
pub fn setup_default<R: RngCore + CryptoRng>(dim: usize, rng: &mut R) -> Result<LatticeParams> {
    setup(128, DEFAULT_DEGREE, DEFAULT_MODULUS_BITS, DEFAULT_PLAIN_MODULUS, dim, rng)
}

impl LatticeParams {
    pub fn new(ring: Params, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(param("message dimension must be positive"));
        }
        let field = ZModPrime::new(ring.modulus())?;
        let blocks = dim.div_ceil(ring.degree());
        Ok(Self { ring, dim, blocks, max_coefficient: DEFAULT_MAX_COEFFICIENT, field })
    }

    /// Overrides the largest accepted scalar evaluation coefficient `A`.
    pub fn with_max_coefficient(mut self, a: u64) -> Self {
        self.max_coefficient = a;
        self
    }

    pub fn ring(&self) -> &Params {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `LN = ⌈dim/d⌉`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn max_coefficient(&self) -> u64 {
        self.max_coefficient
    }

    pub fn degree(&self) -> usize {
        self.ring.degree()
    }

    pub fn modulus(&self) -> u64 {
        self.ring.modulus()
    }

    pub fn plain_modulus(&self) -> u64 {
        self.ring.plain_modulus()
    }

    pub fn share_field(&self) -> &ZModPrime {
        &self.field
    }

    /// Number of Shamir shares each party receives from one dealer: `(1 + LN)·d`.
    pub fn shares_per_party(&self) -> usize {
        (1 + self.blocks) * self.degree()
    }
}

/// A user's key material: ternary secret, public key, and share-transport pair.
#[derive(Debug, Clone)]
pub struct LatticeKeyPair {
    pub sk0: RingElement,
    pub pk0: RingElement,
    pub transport: HybridKeyPair,
}

/// Public half: `(pk₀, pk₁)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePublicKey {
    pub pk0: RingElement,
    pub transport: HybridPublicKey,
}

impl LatticeKeyPair {
    pub fn public(&self) -> LatticePublicKey {
        LatticePublicKey { pk0: self.pk0.clone(), transport: self.transport.public }
    }
}

impl LatticePublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(self.pk0.encoded_len() + POINT_LEN);
        self.pk0.write(&mut w);
        w.raw(self.transport.as_bytes());
        w.finish()
    }

    pub fn from_bytes(params: &LatticeParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let pk0 = RingElement::read(&mut r, params.degree(), params.modulus())?;
        let transport = HybridPublicKey::from_bytes(r.raw(POINT_LEN)?)?;
        r.finish()?;
        Ok(Self { pk0, transport })
    }
}

pub fn keygen<R: RngCore + CryptoRng>(params: &LatticeParams, rng: &mut R) -> LatticeKeyPair {
    let ring = &params.ring;
    let s = ring.sample(Distribution::Ternary, rng);
    let e = ring.sample(Distribution::Gaussian, rng);
    let pk0 = ring.mul(ring.public_element(), &s).and_then(|as_| as_.add(&e)).expect("shapes from params").neg();
    LatticeKeyPair { sk0: s, pk0, transport: hybrid_gen(rng) }
}

/// Output of [`share`].
#[derive(Debug, Clone)]
pub struct ShareOutput {
    /// One encrypted bundle per peer.
    pub bundles: Vec<ShareBundle>,
    /// The dealer's own share vector, kept locally.
    pub retained: ShareVector,
    /// The smoothing-noise polynomials `e_{u,2,j}`, one per block. Never transmitted;
    /// exposed for white-box noise audits.
    pub smoothing: Vec<RingElement>,
}

/// Shares `{sk₀, e_{u,2,1..LN}}` among the parties with ordinals `1..=n`.
///
/// `peers` lists every other party's ordinal and transport key; together with
/// `own_index` they must cover `1..=n` exactly.
pub fn share<R: RngCore + CryptoRng>(
    params: &LatticeParams,
    own_index: u32,
    peers: &[(u32, HybridPublicKey)],
    t: usize,
    kp: &LatticeKeyPair,
    rng: &mut R,
) -> Result<ShareOutput> {
    let n = peers.len() + 1;
    if t > n {
        return Err(Error::Threshold { needed: t, have: n });
    }
    check_ordinals(own_index, peers.iter().map(|p| p.0), n)?;
    let smoothing: Vec<RingElement> =
        (0..params.blocks).map(|_| params.ring.sample(Distribution::Gaussian, rng)).collect();
    let mut secrets = Vec::with_capacity(1 + params.blocks);
    secrets.push(kp.sk0.clone());
    secrets.extend(smoothing.iter().cloned());
    let mut vectors = split_ring(&params.field, &secrets, n, t, rng)?;

    let mut bundles = Vec::with_capacity(peers.len());
    for (idx, pk) in peers {
        let vector = &vectors[*idx as usize - 1];
        let mut w = Writer::with_capacity(8 + 8 * vector.values.len());
        vector.write(&mut w);
        bundles.push(ShareBundle {
            sender: own_index,
            recipient: *idx,
            ciphertext: hybrid_enc(pk, &w.finish(), rng),
        });
    }
    let retained = vectors.swap_remove(own_index as usize - 1);
    Ok(ShareOutput { bundles, retained, smoothing })
}

pub(crate) fn check_ordinals(own: u32, peers: impl Iterator<Item = u32>, n: usize) -> Result<()> {
    let mut seen = vec![false; n + 1];
    for idx in std::iter::once(own).chain(peers) {
        let i = idx as usize;
        if i == 0 || i > n || seen[i] {
            return Err(param(format!("party ordinals must be a permutation of 1..={n}; got {idx}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `pk = [Σ pk_{u,0}]_h`.
pub fn combkey(params: &LatticeParams, keys: &[&RingElement]) -> Result<RingElement> {
    if keys.is_empty() {
        return Err(param("no public keys to combine"));
    }
    let terms: Vec<_> = keys.iter().map(|k| (LinearCoeff::Scalar(1), *k)).collect();
    ring_linear(&terms, params.modulus())
}

/// Message packed into `LN` blocks of `d` coefficients mod `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plaintext {
    pub blocks: Vec<Vec<u64>>,
}

/// Datum `i` goes to coefficient `i mod d` of block `⌊i/d⌋`; the tail is zero.
pub fn encode(params: &LatticeParams, data: &[u64]) -> Result<Plaintext> {
    if data.len() != params.dim {
        return Err(Error::Dimension(format!("message length {} vs dimension {}", data.len(), params.dim)));
    }
    let l = params.plain_modulus();
    if let Some(bad) = data.iter().find(|&&v| v >= l) {
        return Err(Error::Range(format!("datum {bad} not below plaintext modulus {l}")));
    }
    let d = params.degree();
    let mut blocks = vec![vec![0u64; d]; params.blocks];
    for (i, &v) in data.iter().enumerate() {
        blocks[i / d][i % d] = v;
    }
    Ok(Plaintext { blocks })
}

pub fn decode(pt: &Plaintext, dim: usize) -> Vec<u64> {
    pt.blocks.iter().flatten().copied().take(dim).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherBlock {
    pub c0: RingElement,
    pub c1: RingElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub blocks: Vec<CipherBlock>,
}

impl Ciphertext {
    /// `LN` as u32 ‖ per block `c₀ ‖ c₁`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let per = self.blocks.first().map_or(0, |b| b.c0.encoded_len() * 2);
        let mut w = Writer::with_capacity(4 + per * self.blocks.len());
        w.u32(self.blocks.len() as u32);
        for b in &self.blocks {
            b.c0.write(&mut w);
            b.c1.write(&mut w);
        }
        w.finish()
    }

    pub fn from_bytes(params: &LatticeParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let count = r.u32()? as usize;
        if count != params.blocks {
            return Err(Error::Format(format!("ciphertext has {count} blocks, expected {}", params.blocks)));
        }
        let (d, h) = (params.degree(), params.modulus());
        let mut blocks = Vec::with_capacity(count);
        for _ in 0..count {
            let c0 = RingElement::read(&mut r, d, h)?;
            let c1 = RingElement::read(&mut r, d, h)?;
            blocks.push(CipherBlock { c0, c1 });
        }
        r.finish()?;
        Ok(Self { blocks })
    }
}

/// Per-block encryption randomness `(u, e₀, e₁)`.
#[derive(Debug, Clone)]
pub struct EncRandomness {
    pub u: RingElement,
    pub e0: RingElement,
    pub e1: RingElement,
}

impl EncRandomness {
    pub fn sample<R: RngCore + CryptoRng>(params: &LatticeParams, rng: &mut R) -> Self {
        let ring = &params.ring;
        Self {
            u: ring.sample(Distribution::Ternary, rng),
            e0: ring.sample(Distribution::Gaussian, rng),
            e1: ring.sample(Distribution::Gaussian, rng),
        }
    }

    /// All-zero randomness; yields `c₀ = 0`, `c₁ = ⌊h/l⌋·m`.
    pub fn zero(params: &LatticeParams) -> Self {
        Self { u: params.ring.zero(), e0: params.ring.zero(), e1: params.ring.zero() }
    }
}

pub fn enc<R: RngCore + CryptoRng>(
    params: &LatticeParams,
    pk: &RingElement,
    pt: &Plaintext,
    rng: &mut R,
) -> Result<Ciphertext> {
    let randomness: Vec<_> = (0..pt.blocks.len()).map(|_| EncRandomness::sample(params, rng)).collect();
    enc_with(params, pk, pt, &randomness)
}

/// Encryption with caller-supplied randomness, one entry per block.
pub fn enc_with(params: &LatticeParams, pk: &RingElement, pt: &Plaintext, randomness: &[EncRandomness]) -> Result<Ciphertext> {
    if pt.blocks.len() != params.blocks || randomness.len() != params.blocks {
        return Err(Error::Dimension(format!(
            "{} plaintext blocks / {} randomness entries, expected {}",
            pt.blocks.len(),
            randomness.len(),
            params.blocks
        )));
    }
    let ring = &params.ring;
    ring.check_element(pk)?;
    let h = params.modulus();
    let delta = ring.delta() as i128;
    let mut blocks = Vec::with_capacity(params.blocks);
    for (m, r) in pt.blocks.iter().zip(randomness) {
        if m.len() != params.degree() {
            return Err(Error::Dimension(format!("plaintext block of {} coefficients", m.len())));
        }
        let c0 = ring.mul(ring.public_element(), &r.u)?.add(&r.e0)?;
        let scaled: Vec<i64> = m.iter().map(|&v| reduce_centered(delta * v as i128, h)).collect();
        let scaled = RingElement::from_coeffs(&scaled, h);
        let c1 = ring.mul(pk, &r.u)?.add(&r.e1)?.add(&scaled)?;
        blocks.push(CipherBlock { c0, c1 });
    }
    Ok(Ciphertext { blocks })
}

fn check_uniform(params: &LatticeParams, cts: &[&Ciphertext], coeffs: usize) -> Result<()> {
    if cts.is_empty() {
        return Err(param("no ciphertexts to evaluate"));
    }
    if cts.len() != coeffs {
        return Err(Error::Dimension(format!("{} ciphertexts but {coeffs} coefficients", cts.len())));
    }
    if let Some(bad) = cts.iter().find(|c| c.blocks.len() != params.blocks) {
        return Err(Error::Dimension(format!("ciphertext with {} blocks, expected {}", bad.blocks.len(), params.blocks)));
    }
    Ok(())
}

/// `ĉ = (Σ α_u c_{u,0}, Σ α_u c_{u,1})` block-wise with scalar `0 ≤ α_u ≤ A`.
pub fn eval(params: &LatticeParams, cts: &[&Ciphertext], alphas: &[u64]) -> Result<Ciphertext> {
    check_uniform(params, cts, alphas.len())?;
    if let Some(a) = alphas.iter().find(|&&a| a > params.max_coefficient) {
        return Err(Error::Range(format!("coefficient {a} exceeds bound {}", params.max_coefficient)));
    }
    let h = params.modulus();
    let mut blocks = Vec::with_capacity(params.blocks);
    for j in 0..params.blocks {
        let t0: Vec<_> = cts.iter().zip(alphas).map(|(c, &a)| (LinearCoeff::Scalar(a as i64), &c.blocks[j].c0)).collect();
        let t1: Vec<_> = cts.iter().zip(alphas).map(|(c, &a)| (LinearCoeff::Scalar(a as i64), &c.blocks[j].c1)).collect();
        blocks.push(CipherBlock { c0: ring_linear(&t0, h)?, c1: ring_linear(&t1, h)? });
    }
    Ok(Ciphertext { blocks })
}

/// [`eval`] with ring-element coefficients. The correctness bound then uses `A = max ‖α_u‖`.
pub fn eval_ring(params: &LatticeParams, cts: &[&Ciphertext], alphas: &[RingElement]) -> Result<Ciphertext> {
    check_uniform(params, cts, alphas.len())?;
    let ring = &params.ring;
    let mut blocks = Vec::with_capacity(params.blocks);
    for j in 0..params.blocks {
        let mut c0 = ring.zero();
        let mut c1 = ring.zero();
        for (c, a) in cts.iter().zip(alphas) {
            c0 = c0.add(&ring.mul(a, &c.blocks[j].c0)?)?;
            c1 = c1.add(&ring.mul(a, &c.blocks[j].c1)?)?;
        }
        blocks.push(CipherBlock { c0, c1 });
    }
    Ok(Ciphertext { blocks })
}

/// One party's share-weighted decryption contribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u32,
    pub blocks: Vec<RingElement>,
}

impl PartialDecryption {
    /// index u32 ‖ LN u32 ‖ LN ring elements.
    pub fn to_bytes(&self) -> Vec<u8> {
        let per = self.blocks.first().map_or(0, |b| b.encoded_len());
        let mut w = Writer::with_capacity(8 + per * self.blocks.len());
        w.u32(self.index).u32(self.blocks.len() as u32);
        for b in &self.blocks {
            b.write(&mut w);
        }
        w.finish()
    }

    pub fn from_bytes(params: &LatticeParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let index = r.u32()?;
        let count = r.u32()? as usize;
        if count != params.blocks {
            return Err(Error::Format(format!("partial decryption has {count} blocks, expected {}", params.blocks)));
        }
        let blocks = (0..count)
            .map(|_| RingElement::read(&mut r, params.degree(), params.modulus()))
            .collect::<Result<_>>()?;
        r.finish()?;
        Ok(Self { index, blocks })
    }
}

/// Opens the bundles addressed to `own_index` and sums them with the retained vector.
pub fn collect_shares(
    params: &LatticeParams,
    own_index: u32,
    bundles: &[ShareBundle],
    retained: &ShareVector,
    transport: &HybridKeyPair,
) -> Result<ShareVector> {
    let field = &params.field;
    let expected = params.shares_per_party();
    let check = |v: &ShareVector, from: u32| -> Result<()> {
        if v.index != own_index {
            return Err(Error::Transport(format!("shares from {from} are for party {}, not {own_index}", v.index)));
        }
        if v.values.len() != expected {
            return Err(Error::Format(format!("{} shares from {from}, expected {expected}", v.values.len())));
        }
        Ok(())
    };
    check(retained, own_index)?;
    let mut sum = retained.values.clone();
    for b in bundles {
        if b.recipient != own_index {
            return Err(Error::Transport(format!("bundle from {} addressed to {}", b.sender, b.recipient)));
        }
        let plain = hybrid_dec(transport, &b.ciphertext)
            .map_err(|_| Error::Transport(format!("cannot open bundle from {}", b.sender)))?;
        let mut r = Reader::new(&plain);
        let v = ShareVector::read(&mut r, field)?;
        r.finish()?;
        check(&v, b.sender)?;
        for (acc, x) in sum.iter_mut().zip(&v.values) {
            *acc = field.add(*acc, *x);
        }
    }
    Ok(ShareVector { index: own_index, values: sum })
}

/// `m̂_{u,j} = [ĉ₀ⱼ·Σ ssk + Σ se_j]_h` from already-summed shares.
pub fn pardec_from_shares(params: &LatticeParams, ct: &Ciphertext, summed: &ShareVector) -> Result<PartialDecryption> {
    if ct.blocks.len() != params.blocks {
        return Err(Error::Dimension(format!("ciphertext with {} blocks", ct.blocks.len())));
    }
    if summed.values.len() != params.shares_per_party() {
        return Err(Error::Format(format!("{} summed shares, expected {}", summed.values.len(), params.shares_per_party())));
    }
    let d = params.degree();
    let h = params.modulus();
    let ssk = RingElement::from_lifted(&summed.values[..d], h);
    let mut blocks = Vec::with_capacity(params.blocks);
    for (j, b) in ct.blocks.iter().enumerate() {
        let se = RingElement::from_lifted(&summed.values[(1 + j) * d..(2 + j) * d], h);
        blocks.push(params.ring.mul(&b.c0, &ssk)?.add(&se)?);
    }
    Ok(PartialDecryption { index: summed.index, blocks })
}

pub fn pardec(
    params: &LatticeParams,
    ct: &Ciphertext,
    own_index: u32,
    bundles: &[ShareBundle],
    retained: &ShareVector,
    transport: &HybridKeyPair,
) -> Result<PartialDecryption> {
    let summed = collect_shares(params, own_index, bundles, retained, transport)?;
    pardec_from_shares(params, ct, &summed)
}

/// `cs = [Σ_{u∈V} li_u·m̂_u]_h` per block.
pub fn combine_partials(params: &LatticeParams, partials: &[PartialDecryption]) -> Result<Vec<RingElement>> {
    let indices: Vec<u32> = partials.iter().map(|p| p.index).collect();
    let li = lagrange_coeffs(&params.field, &indices)?;
    let h = params.modulus();
    let mut out = Vec::with_capacity(params.blocks);
    for j in 0..params.blocks {
        let terms: Vec<_> = partials
            .iter()
            .zip(&li)
            .map(|(p, &l)| (LinearCoeff::Scalar(reduce_centered(l as i128, h)), &p.blocks[j]))
            .collect();
        out.push(ring_linear(&terms, h)?);
    }
    Ok(out)
}

/// Recovers `Σ α_u m_u mod l` from at least `t` partial decryptions.
pub fn findec(params: &LatticeParams, t: usize, ct: &Ciphertext, partials: &[PartialDecryption]) -> Result<Vec<u64>> {
    if partials.len() < t {
        return Err(Error::Threshold { needed: t, have: partials.len() });
    }
    if ct.blocks.len() != params.blocks {
        return Err(Error::Dimension(format!("ciphertext with {} blocks", ct.blocks.len())));
    }
    if let Some(p) = partials.iter().find(|p| p.blocks.len() != params.blocks) {
        return Err(Error::Dimension(format!("partial from {} has {} blocks", p.index, p.blocks.len())));
    }
    let cs = combine_partials(params, partials)?;
    let l = params.plain_modulus();
    let blocks = ct
        .blocks
        .iter()
        .zip(&cs)
        .map(|(b, cs)| Ok(round_scale(&b.c1.add(cs)?, l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(decode(&Plaintext { blocks }, params.dim))
}

/// Shared handle used by the protocol layer.
pub type SharedParams = Arc<LatticeParams>;
