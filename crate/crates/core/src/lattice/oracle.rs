//! Reference routines for auditing the lattice scheme.
//!
//! These bypass the threshold machinery: they decrypt with the summed secret
//! directly, reconstruct the exact decryption noise from white-box randomness,
//! and simulate a partial decryption from the plaintext and noise alone. None
//! of them are used by the protocol.

use rand::{CryptoRng, RngCore};

use super::{enc_with, Ciphertext, EncRandomness, LatticeKeyPair, LatticeParams, PartialDecryption, Plaintext};
use crate::error::{param, Error, Result};
use crate::ring::{lift, reduce_centered, ring_mul, round_scale, RingElement};
use crate::shamir::{lagrange_coeffs, ShareField};

/// Encrypts and returns the randomness used, for noise reconstruction.
pub fn enc_traced<R: RngCore + CryptoRng>(
    params: &LatticeParams,
    pk: &RingElement,
    pt: &Plaintext,
    rng: &mut R,
) -> Result<(Ciphertext, Vec<EncRandomness>)> {
    let randomness: Vec<_> = (0..pt.blocks.len()).map(|_| EncRandomness::sample(params, rng)).collect();
    Ok((enc_with(params, pk, pt, &randomness)?, randomness))
}

/// `⌊l·[ĉ₁ + ĉ₀·s]_h / h⌉ mod l` with `s = Σ sk_u`, using schoolbook multiplication.
pub fn oracle_decrypt(params: &LatticeParams, ct: &Ciphertext, sk_sum: &RingElement) -> Result<Vec<u64>> {
    let h = params.modulus();
    let blocks = ct
        .blocks
        .iter()
        .map(|b| Ok(round_scale(&b.c1.add(&ring_mul(&b.c0, sk_sum, h)?)?, params.plain_modulus())))
        .collect::<Result<Vec<_>>>()?;
    Ok(super::decode(&Plaintext { blocks }, params.dim()))
}

/// The key noise `e_u = [-pk₀ - a·s_u]_h`.
pub fn key_noise(params: &LatticeParams, kp: &LatticeKeyPair) -> Result<RingElement> {
    let ring = params.ring();
    Ok(kp.pk0.add(&ring_mul(ring.public_element(), &kp.sk0, params.modulus())?)?.neg())
}

/// Negacyclic product over `Z`, with no modular reduction.
pub fn exact_negacyclic(a: &[i128], b: &[i128]) -> Vec<i128> {
    let d = a.len();
    let mut out = vec![0i128; d];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let k = i + j;
            if k < d {
                out[k] += x * y;
            } else {
                out[k - d] -= x * y;
            }
        }
    }
    out
}

/// A party whose key is part of the combined key and whose shares were used.
#[derive(Debug, Clone, Copy)]
pub struct KeyHolderTrace<'a> {
    pub keys: &'a LatticeKeyPair,
    pub smoothing: &'a [RingElement],
}

/// A party whose ciphertext entered the evaluation with weight `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct EncryptorTrace<'a> {
    pub alpha: u64,
    pub randomness: &'a [EncRandomness],
}

fn widen(v: &RingElement) -> Vec<i128> {
    v.coeffs().iter().map(|&c| c as i128).collect()
}

fn accumulate(acc: &mut [i128], v: &[i128], k: i128) {
    for (a, &x) in acc.iter_mut().zip(v) {
        *a += k * x;
    }
}

/// Exact decryption noise per block:
/// `NS = Σα e₁ + (Σα e₀)(Σ sk) + Σ e₂ − (Σα u)(Σ e)`.
pub fn noise_term(
    params: &LatticeParams,
    holders: &[KeyHolderTrace<'_>],
    encryptors: &[EncryptorTrace<'_>],
) -> Result<Vec<Vec<i128>>> {
    let d = params.degree();
    let mut sk_sum = vec![0i128; d];
    let mut e_sum = vec![0i128; d];
    for h in holders {
        accumulate(&mut sk_sum, &widen(&h.keys.sk0), 1);
        accumulate(&mut e_sum, &widen(&key_noise(params, h.keys)?), 1);
        if h.smoothing.len() != params.blocks() {
            return Err(Error::Dimension("smoothing noise count differs from block count".into()));
        }
    }
    let mut out = Vec::with_capacity(params.blocks());
    for j in 0..params.blocks() {
        let mut e1 = vec![0i128; d];
        let mut e0 = vec![0i128; d];
        let mut u = vec![0i128; d];
        for enc in encryptors {
            let r = enc.randomness.get(j).ok_or_else(|| param("missing encryption randomness"))?;
            let a = enc.alpha as i128;
            accumulate(&mut e1, &widen(&r.e1), a);
            accumulate(&mut e0, &widen(&r.e0), a);
            accumulate(&mut u, &widen(&r.u), a);
        }
        let mut ns = e1;
        accumulate(&mut ns, &exact_negacyclic(&e0, &sk_sum), 1);
        for h in holders {
            accumulate(&mut ns, &widen(&h.smoothing[j]), 1);
        }
        accumulate(&mut ns, &exact_negacyclic(&u, &e_sum), -1);
        out.push(ns);
    }
    Ok(out)
}

/// `max |NS_i|` over all blocks.
pub fn noise_norm(ns: &[Vec<i128>]) -> u128 {
    ns.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0)
}

/// Rebuilds party `u`'s partial decryption without its shares:
/// `m̃_u = [li_u⁻¹(⌊h/l⌋·Σα m + NS − ĉ₁ − Σ_{v∈S*} li_v m̂_v)]_h`
/// with Lagrange coefficients over `V = S* ∪ {u}`. `target` holds the integer
/// (not reduced mod `l`) per-coefficient sums `Σ α_v m_v`, one vector per block.
pub fn simulate_pardec(
    params: &LatticeParams,
    ct: &Ciphertext,
    s_star: &[PartialDecryption],
    target: &[Vec<u64>],
    ns: &[Vec<i128>],
    u: u32,
) -> Result<PartialDecryption> {
    if s_star.iter().any(|p| p.index == u) {
        return Err(param(format!("party {u} is already in S*")));
    }
    let blocks = params.blocks();
    if target.len() != blocks || ns.len() != blocks || ct.blocks.len() != blocks {
        return Err(Error::Dimension("target, noise, and ciphertext block counts differ".into()));
    }
    let mut indices: Vec<u32> = s_star.iter().map(|p| p.index).collect();
    indices.push(u);
    let field = params.share_field();
    let li = lagrange_coeffs(field, &indices)?;
    let li_u = *li.last().expect("nonempty");
    let li_u_inv = field.inv(li_u).ok_or_else(|| param("Lagrange coefficient not invertible"))?;
    let h = params.modulus();
    let delta = params.ring().delta() as i128;
    let mut out = Vec::with_capacity(blocks);
    for j in 0..blocks {
        let coeffs: Vec<i64> = (0..params.degree())
            .map(|i| {
                let mut x = delta * target[j][i] as i128 + ns[j][i] - ct.blocks[j].c1.coeffs()[i] as i128;
                x = x.rem_euclid(h as i128);
                let mut acc = x as u64;
                for (p, &l) in s_star.iter().zip(&li) {
                    acc = field.sub(acc, field.mul(l, lift(p.blocks[j].coeffs()[i], h)));
                }
                reduce_centered(field.mul(li_u_inv, acc) as i128, h)
            })
            .collect();
        out.push(RingElement::from_coeffs(&coeffs, h));
    }
    Ok(PartialDecryption { index: u, blocks: out })
}
