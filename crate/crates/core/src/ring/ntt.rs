//! Negacyclic number-theoretic transform over `Z_h[x]/(x^d + 1)`.
//!
//! Requires a prime `h ≡ 1 (mod 2d)` so that a primitive `2d`-th root of unity
//! `ψ` exists. Forward transform is Cooley-Tukey with the `ψ` twist merged into
//! the twiddles; the inverse is Gentleman-Sande.

use super::modular::{add_mod, inv_mod, mul_mod, pow_mod, sub_mod};
use crate::error::{param, Result};

#[derive(Debug, Clone)]
pub struct NttTables {
    n: usize,
    q: u64,
    psi_rev: Vec<(u64, u64)>,
    psi_inv_rev: Vec<(u64, u64)>,
    n_inv: (u64, u64),
}

/// `(w, ⌊w·2^64 / q⌋)` for Shoup multiplication by a fixed operand.
fn shoup(w: u64, q: u64) -> (u64, u64) {
    (w, (((w as u128) << 64) / q as u128) as u64)
}

#[inline]
fn mul_shoup(a: u64, (w, w_shoup): (u64, u64), q: u64) -> u64 {
    let hi = ((a as u128 * w_shoup as u128) >> 64) as u64;
    let r = a.wrapping_mul(w).wrapping_sub(hi.wrapping_mul(q));
    if r >= q {
        r - q
    } else {
        r
    }
}

fn bit_reverse(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

fn primitive_root_2n(n: usize, q: u64) -> Result<u64> {
    let two_n = 2 * n as u64;
    if !(q - 1).is_multiple_of(two_n) {
        return Err(param(format!("modulus {q} is not 1 mod {two_n}")));
    }
    let cofactor = (q - 1) / two_n;
    for g in 2..q.min(10_000) {
        let psi = pow_mod(g, cofactor, q);
        // order divides 2n; it is exactly 2n iff psi^n = -1
        if pow_mod(psi, n as u64, q) == q - 1 {
            return Ok(psi);
        }
    }
    Err(param(format!("no primitive {two_n}-th root of unity mod {q}")))
}

impl NttTables {
    pub fn new(n: usize, q: u64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(param("transform length must be a power of two"));
        }
        if q >= 1 << 62 {
            return Err(param("modulus must be below 2^62"));
        }
        let psi = primitive_root_2n(n, q)?;
        let psi_inv = inv_mod(psi, q).expect("root is a unit");
        let bits = n.trailing_zeros();
        let mut psi_rev = vec![(0, 0); n];
        let mut psi_inv_rev = vec![(0, 0); n];
        let (mut p, mut pi) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[r] = shoup(p, q);
            psi_inv_rev[r] = shoup(pi, q);
            p = mul_mod(p, psi, q);
            pi = mul_mod(pi, psi_inv, q);
        }
        let n_inv = shoup(inv_mod(n as u64 % q, q).expect("n < q"), q);
        Ok(Self { n, q, psi_rev, psi_inv_rev, n_inv })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, a: &mut [u64]) {
        let q = self.q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t /= 2;
            for i in 0..m {
                let s = self.psi_rev[m + i];
                let j1 = 2 * i * t;
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_shoup(a[j + t], s, q);
                    a[j] = add_mod(u, v, q);
                    a[j + t] = sub_mod(u, v, q);
                }
            }
            m *= 2;
        }
    }

    pub fn inverse(&self, a: &mut [u64]) {
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m / 2;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, q);
                    a[j + t] = mul_shoup(sub_mod(u, v, q), s, q);
                }
                j1 += 2 * t;
            }
            t *= 2;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_shoup(*x, self.n_inv, q);
        }
    }

    /// Negacyclic product of two vectors of residues in `[0, q)`.
    pub fn multiply(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut fa = a.to_vec();
        let mut fb = b.to_vec();
        self.forward(&mut fa);
        self.forward(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = mul_mod(*x, *y, self.q);
        }
        self.inverse(&mut fa);
        fa
    }
}
