//! Shamir threshold sharing and Lagrange reconstruction over a prime field.
//!
//! Sharing is generic over [`ShareField`] so the same code serves `Z_h` for
//! lattice keys and the P-256 scalar field for ElGamal keys. Evaluation points
//! are party ordinals `1..=n`.

use std::fmt::Debug;

use rand::{CryptoRng, Rng, RngCore};

use crate::error::{param, Error, Result};
use crate::ring::{lift, modular, reduce_centered, RingElement};
use crate::wire::{Reader, Writer};

/// Minimal prime-field interface used by sharing and interpolation.
pub trait ShareField {
    type Elem: Copy + PartialEq + Eq + Debug;

    fn zero(&self) -> Self::Elem;
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// `None` for zero.
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;
    fn random<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Self::Elem;
    /// Whether `n` distinct nonzero evaluation points exist.
    fn supports_parties(&self, n: usize) -> bool;
}

/// `Z_p` for a prime `p < 2^63`, elements stored in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZModPrime {
    p: u64,
}

impl ZModPrime {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 || !modular::is_prime(p) {
            return Err(param(format!("share modulus {p} is not a prime below 2^63")));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl ShareField for ZModPrime {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        modular::add_mod(a, b, self.p)
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        modular::sub_mod(a, b, self.p)
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        modular::mul_mod(a, b, self.p)
    }

    fn inv(&self, a: u64) -> Option<u64> {
        modular::inv_mod(a, self.p)
    }

    fn random<R: RngCore + CryptoRng>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    fn supports_parties(&self, n: usize) -> bool {
        (n as u64) < self.p
    }
}

/// One party's evaluation of a sharing polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Share<E> {
    pub index: u32,
    pub value: E,
}

impl Share<u64> {
    pub const ENCODED_LEN: usize = 12;

    /// 4-byte little-endian index followed by the 8-byte little-endian value.
    pub fn to_bytes(&self) -> [u8; 12] {
        let mut out = [0u8; 12];
        out[..4].copy_from_slice(&self.index.to_le_bytes());
        out[4..].copy_from_slice(&self.value.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], field: &ZModPrime) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let index = r.u32()?;
        let value = r.u64()?;
        r.finish()?;
        if index == 0 || value >= field.modulus() {
            return Err(Error::Format(format!("share (index {index}, value {value}) out of range")));
        }
        Ok(Self { index, value })
    }
}

fn check_split<F: ShareField>(field: &F, n: usize, t: usize) -> Result<()> {
    if t == 0 || t > n {
        return Err(param(format!("threshold {t} must satisfy 1 <= t <= n = {n}")));
    }
    if n > u32::MAX as usize || !field.supports_parties(n) {
        return Err(param(format!("{n} parties exceed the field's evaluation points")));
    }
    Ok(())
}

/// Horner evaluation of `Σ poly[k] x^k`.
fn eval_poly<F: ShareField>(field: &F, poly: &[F::Elem], x: F::Elem) -> F::Elem {
    poly.iter().rev().fold(field.zero(), |acc, &c| field.add(field.mul(acc, x), c))
}

/// Splits `secret` into `n` shares, any `t` of which reconstruct it.
pub fn ss_split<F: ShareField, R: RngCore + CryptoRng>(
    field: &F,
    secret: F::Elem,
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<Vec<Share<F::Elem>>> {
    check_split(field, n, t)?;
    let mut poly = Vec::with_capacity(t);
    poly.push(secret);
    poly.extend((1..t).map(|_| field.random(rng)));
    ss_split_with_polynomial(field, &poly, n)
}

/// Evaluates a caller-chosen polynomial (constant term first) at `1..=n`.
pub fn ss_split_with_polynomial<F: ShareField>(field: &F, poly: &[F::Elem], n: usize) -> Result<Vec<Share<F::Elem>>> {
    check_split(field, n, poly.len())?;
    Ok((1..=n as u32)
        .map(|i| Share { index: i, value: eval_poly(field, poly, field.from_u64(i as u64)) })
        .collect())
}

/// `li_u = Π_{v≠u} idx_v / (idx_v − idx_u)`, in the order of `indices`.
pub fn lagrange_coeffs<F: ShareField>(field: &F, indices: &[u32]) -> Result<Vec<F::Elem>> {
    if indices.is_empty() {
        return Err(param("empty reconstruction set"));
    }
    let points: Vec<F::Elem> = indices.iter().map(|&i| field.from_u64(i as u64)).collect();
    let mut out = Vec::with_capacity(points.len());
    for (k, &xu) in points.iter().enumerate() {
        if xu == field.zero() {
            return Err(param(format!("evaluation point {} is zero in the field", indices[k])));
        }
        let mut num = field.from_u64(1);
        let mut den = field.from_u64(1);
        for (j, &xv) in points.iter().enumerate() {
            if j == k {
                continue;
            }
            if xv == xu {
                return Err(param(format!("repeated evaluation point {}", indices[k])));
            }
            num = field.mul(num, xv);
            den = field.mul(den, field.sub(xv, xu));
        }
        let inv = field.inv(den).ok_or_else(|| param("singular interpolation set"))?;
        out.push(field.mul(num, inv));
    }
    Ok(out)
}

/// Interpolates the constant term from at least `t` shares.
pub fn ss_recover<F: ShareField>(field: &F, shares: &[Share<F::Elem>], t: usize) -> Result<F::Elem> {
    if shares.len() < t {
        return Err(Error::Threshold { needed: t, have: shares.len() });
    }
    let indices: Vec<u32> = shares.iter().map(|s| s.index).collect();
    let coeffs = lagrange_coeffs(field, &indices)?;
    Ok(shares
        .iter()
        .zip(coeffs)
        .fold(field.zero(), |acc, (s, li)| field.add(acc, field.mul(li, s.value))))
}

/// All of one party's shares of a list of ring elements, element-major then coefficient order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    pub index: u32,
    pub values: Vec<u64>,
}

impl ShareVector {
    /// Index once, then one 8-byte word per share value.
    pub fn write(&self, w: &mut Writer) {
        w.u32(self.index);
        w.u32(self.values.len() as u32);
        for &v in &self.values {
            w.u64(v);
        }
    }

    pub fn read(r: &mut Reader<'_>, field: &ZModPrime) -> Result<Self> {
        let index = r.u32()?;
        let count = r.u32()? as usize;
        if count.saturating_mul(8) > r.remaining() {
            return Err(Error::Format(format!("share count {count} exceeds payload")));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let v = r.u64()?;
            if v >= field.modulus() {
                return Err(Error::Format(format!("share value {v} not below modulus")));
            }
            values.push(v);
        }
        Ok(Self { index, values })
    }

    /// The `k`-th share as a standalone [`Share`].
    pub fn share(&self, k: usize) -> Share<u64> {
        Share { index: self.index, value: self.values[k] }
    }
}

/// Shares every coefficient of every element independently; returns one vector per party `1..=n`.
pub fn split_ring<R: RngCore + CryptoRng>(
    field: &ZModPrime,
    elems: &[RingElement],
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<Vec<ShareVector>> {
    check_split(field, n, t)?;
    let p = field.modulus();
    if let Some(e) = elems.iter().find(|e| e.modulus() != p) {
        return Err(Error::Dimension(format!("element modulus {} vs share field {p}", e.modulus())));
    }
    let total: usize = elems.iter().map(|e| e.degree()).sum();
    let mut out: Vec<ShareVector> =
        (1..=n as u32).map(|i| ShareVector { index: i, values: Vec::with_capacity(total) }).collect();
    let mut poly = vec![0u64; t];
    for e in elems {
        for &c in e.coeffs() {
            poly[0] = lift(c, p);
            for k in poly.iter_mut().skip(1) {
                *k = rng.gen_range(0..p);
            }
            for party in out.iter_mut() {
                let x = party.index as u64;
                party.values.push(eval_poly(field, &poly, x));
            }
        }
    }
    Ok(out)
}

/// Inverse of [`split_ring`] given at least `t` parties' vectors.
pub fn recover_ring(
    field: &ZModPrime,
    parties: &[ShareVector],
    t: usize,
    degrees: &[usize],
) -> Result<Vec<RingElement>> {
    if parties.len() < t {
        return Err(Error::Threshold { needed: t, have: parties.len() });
    }
    let total: usize = degrees.iter().sum();
    if let Some(bad) = parties.iter().find(|s| s.values.len() != total) {
        return Err(Error::Format(format!("party {} holds {} shares, expected {total}", bad.index, bad.values.len())));
    }
    let indices: Vec<u32> = parties.iter().map(|s| s.index).collect();
    let li = lagrange_coeffs(field, &indices)?;
    let p = field.modulus();
    let mut out = Vec::with_capacity(degrees.len());
    let mut offset = 0;
    for &d in degrees {
        let coeffs: Vec<i64> = (offset..offset + d)
            .map(|k| {
                let v = parties
                    .iter()
                    .zip(&li)
                    .fold(0u64, |acc, (s, &l)| field.add(acc, field.mul(l, s.values[k])));
                reduce_centered(v as i128, p)
            })
            .collect();
        out.push(RingElement::from_coeffs(&coeffs, p));
        offset += d;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn hand_example() {
        let f = ZModPrime::new(17).unwrap();
        let shares = ss_split_with_polynomial(&f, &[5, 3], 3).unwrap();
        let pairs: Vec<(u32, u64)> = shares.iter().map(|s| (s.index, s.value)).collect();
        assert_eq!(pairs, vec![(1, 8), (2, 11), (3, 14)]);
        assert_eq!(ss_recover(&f, &shares[..2], 2).unwrap(), 5);
    }

    #[test]
    fn threshold_one_copies_secret() {
        let f = ZModPrime::new(101).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let shares = ss_split(&f, 42, 5, 1, &mut rng).unwrap();
        assert!(shares.iter().all(|s| s.value == 42));
    }

    #[test]
    fn parameter_errors() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = ZModPrime::new(101).unwrap();
        assert!(matches!(ss_split(&f, 1, 3, 4, &mut rng), Err(Error::Parameter(_))));
        assert!(ss_split(&f, 1, 3, 0, &mut rng).is_err());
        assert!(ZModPrime::new(91).is_err());
        assert!(ss_split(&ZModPrime::new(5).unwrap(), 1, 5, 2, &mut rng).is_err());
        let shares = ss_split(&f, 7, 4, 3, &mut rng).unwrap();
        assert_eq!(ss_recover(&f, &shares[..2], 3), Err(Error::Threshold { needed: 3, have: 2 }));
    }

    #[test]
    fn lagrange_examples() {
        let f = ZModPrime::new(17).unwrap();
        assert_eq!(lagrange_coeffs(&f, &[1, 2]).unwrap(), vec![2, 16]);
        assert_eq!(lagrange_coeffs(&f, &[5]).unwrap(), vec![1]);
        let li = lagrange_coeffs(&f, &[1, 2, 3]).unwrap();
        let sum: u64 = li.iter().sum::<u64>() % 17;
        assert_eq!(sum, 1);
        for power in 1..3u32 {
            let s = li.iter().zip(1u64..).map(|(&l, i)| l * i.pow(power)).sum::<u64>() % 17;
            assert_eq!(s, 0, "x^{power}");
        }
        assert!(lagrange_coeffs(&f, &[1, 1]).is_err());
        assert!(lagrange_coeffs(&f, &[1, 18]).is_err());
    }

    #[test]
    fn exhaustive_subset_recovery() {
        let f = ZModPrime::new(101).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in 1..=6 {
            for t in 1..=n {
                let secret = rng.gen_range(0..101);
                let shares = ss_split(&f, secret, n, t, &mut rng).unwrap();
                for k in t..=n {
                    for subset in subsets(n, k) {
                        let picked: Vec<_> = subset.iter().map(|&i| shares[i]).collect();
                        assert_eq!(ss_recover(&f, &picked, t).unwrap(), secret);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_secret_from_any_subset() {
        let f = ZModPrime::new(101).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let shares = ss_split(&f, 0, 5, 3, &mut rng).unwrap();
        for subset in subsets(5, 3) {
            let picked: Vec<_> = subset.iter().map(|&i| shares[i]).collect();
            assert_eq!(ss_recover(&f, &picked, 3).unwrap(), 0);
        }
    }

    /// Solves for the unique degree-(t-1) polynomial through t-1 shares plus (0, s').
    fn consistent_polynomial(f: &ZModPrime, shares: &[Share<u64>], candidate: u64) -> Vec<u64> {
        let mut points: Vec<(u64, u64)> = vec![(0, candidate)];
        points.extend(shares.iter().map(|s| (s.index as u64, s.value)));
        // Newton-free approach: Lagrange basis expansion into coefficients
        let t = points.len();
        let p = f.modulus();
        let mut coeffs = vec![0u64; t];
        for (k, &(xk, yk)) in points.iter().enumerate() {
            let mut basis = vec![1u64];
            let mut den = 1u64;
            for (j, &(xj, _)) in points.iter().enumerate() {
                if j == k {
                    continue;
                }
                let mut next = vec![0u64; basis.len() + 1];
                for (i, &b) in basis.iter().enumerate() {
                    next[i + 1] = f.add(next[i + 1], b);
                    next[i] = f.sub(next[i], f.mul(b, xj));
                }
                basis = next;
                den = f.mul(den, f.sub(xk, xj));
            }
            let scale = f.mul(yk, modular::inv_mod(den, p).unwrap());
            for (c, b) in coeffs.iter_mut().zip(basis) {
                *c = f.add(*c, f.mul(scale, b));
            }
        }
        coeffs
    }

    #[test]
    fn fewer_than_t_shares_are_consistent_with_every_secret() {
        let f = ZModPrime::new(101).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let shares = ss_split(&f, 33, 5, 3, &mut rng).unwrap();
        let partial = &shares[1..3];
        for candidate in 0..101 {
            let poly = consistent_polynomial(&f, partial, candidate);
            assert_eq!(poly.len(), 3);
            assert_eq!(eval_poly(&f, &poly, 0), candidate);
            for s in partial {
                assert_eq!(eval_poly(&f, &poly, s.index as u64), s.value);
            }
        }
    }

    #[test]
    fn share_wire_format() {
        let f = ZModPrime::new(101).unwrap();
        let s = Share { index: 3, value: 99 };
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], &[3, 0, 0, 0]);
        assert_eq!(Share::from_bytes(&bytes, &f).unwrap(), s);
        assert!(Share::from_bytes(&Share { index: 0, value: 1 }.to_bytes(), &f).is_err());
        assert!(Share::from_bytes(&Share { index: 1, value: 101 }.to_bytes(), &f).is_err());
    }

    #[test]
    fn ring_split_counts_and_recovery() {
        let f = ZModPrime::new(17).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let a = RingElement::from_coeffs(&[1i64, -2, 8, 0], 17);
        let b = RingElement::from_coeffs(&[-8i64, 0, 3, 4], 17);
        let parts = split_ring(&f, &[a.clone(), b.clone()], 3, 2, &mut rng).unwrap();
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|p| p.values.len() == 8));
        for subset in subsets(3, 2) {
            let picked: Vec<_> = subset.iter().map(|&i| parts[i].clone()).collect();
            assert_eq!(recover_ring(&f, &picked, 2, &[4, 4]).unwrap(), vec![a.clone(), b.clone()]);
        }
        let zero = RingElement::zero(4, 17);
        let parts = split_ring(&f, std::slice::from_ref(&zero), 3, 3, &mut rng).unwrap();
        assert_eq!(recover_ring(&f, &parts, 3, &[4]).unwrap(), vec![zero]);
        assert!(recover_ring(&f, &parts[..2], 3, &[4]).is_err());
    }

    #[test]
    fn share_vector_round_trip() {
        let f = ZModPrime::new(101).unwrap();
        let v = ShareVector { index: 4, values: vec![0, 5, 100] };
        let mut w = Writer::new();
        v.write(&mut w);
        let bytes = w.finish();
        let mut r = Reader::new(&bytes);
        assert_eq!(ShareVector::read(&mut r, &f).unwrap(), v);
        r.finish().unwrap();
    }

    proptest! {
        #[test]
        fn recovery_is_linear(s1 in 0u64..101, s2 in 0u64..101, seed in any::<u64>()) {
            let f = ZModPrime::new(101).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = ss_split(&f, s1, 5, 3, &mut rng).unwrap();
            let b = ss_split(&f, s2, 5, 3, &mut rng).unwrap();
            let sum: Vec<Share<u64>> = a.iter().zip(&b).map(|(x, y)| Share { index: x.index, value: f.add(x.value, y.value) }).collect();
            prop_assert_eq!(ss_recover(&f, &sum[2..], 3).unwrap(), (s1 + s2) % 101);
        }
    }
}
