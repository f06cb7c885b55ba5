//! Arithmetic in `R_h = Z_h[x]/(x^d + 1)` with centered residues.
//!
//! Coefficients are kept in the centered range `(-h/2, h/2]`. Products are
//! available through two independent routes: [`ring_mul`] (schoolbook, valid
//! for any modulus) and [`Params::mul`] (negacyclic NTT, requires the prime
//! `h ≡ 1 mod 2d` that [`Params`] enforces). Both produce identical output.

pub mod modular;
mod noise;
mod ntt;
mod sampler;

use std::fmt;
use std::sync::Arc;

use rand::{CryptoRng, RngCore};

use crate::error::{param, Error, Result};
use crate::wire::{Reader, Writer};

pub use noise::{check_noise_bound, noise_bound, validate_noise_bound, NoiseBoundReport, NoiseMode};
pub use ntt::NttTables;
pub use sampler::{Distribution, GaussianTable};

/// Default Gaussian standard deviation for the noise distribution.
pub const DEFAULT_SIGMA: f64 = 3.2;
/// Default truncation radius: the noise distribution is `B`-bounded with `B = ⌈6σ⌉`.
pub const DEFAULT_NOISE_BOUND: u32 = 20;
/// Default plaintext modulus, a 17-bit prime.
pub const DEFAULT_PLAIN_MODULUS: u64 = 65_537;

/// `[x]_h`: the unique representative of `x mod h` in `(-h/2, h/2]`.
#[inline]
pub fn reduce_centered(x: i128, h: u64) -> i64 {
    debug_assert!(h >= 2);
    let h = h as i128;
    let r = x.rem_euclid(h);
    if 2 * r > h {
        (r - h) as i64
    } else {
        r as i64
    }
}

/// Centered residue to its lift in `[0, h)`.
#[inline]
pub fn lift(c: i64, h: u64) -> u64 {
    (c as i128).rem_euclid(h as i128) as u64
}

/// A polynomial of degree `< d` with coefficients centered mod `h`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    coeffs: Vec<i64>,
    modulus: u64,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 8;
        write!(f, "RingElement(d={}, h={}, [", self.coeffs.len(), self.modulus)?;
        for (i, c) in self.coeffs.iter().take(SHOWN).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if self.coeffs.len() > SHOWN {
            write!(f, ", ...")?;
        }
        write!(f, "])")
    }
}

impl RingElement {
    pub fn zero(degree: usize, modulus: u64) -> Self {
        Self { coeffs: vec![0; degree], modulus }
    }

    /// Builds an element from arbitrary integers, reducing each into the centered range.
    pub fn from_coeffs<I: Into<i128> + Copy>(coeffs: &[I], modulus: u64) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| reduce_centered(c.into(), modulus)).collect(),
            modulus,
        }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: i64, degree: usize, modulus: u64) -> Self {
        let mut out = Self::zero(degree, modulus);
        if degree > 0 {
            out.coeffs[0] = reduce_centered(c as i128, modulus);
        }
        out
    }

    /// Builds an element from residues in `[0, h)`.
    pub fn from_lifted(values: &[u64], modulus: u64) -> Self {
        Self {
            coeffs: values.iter().map(|&v| reduce_centered(v as i128, modulus)).collect(),
            modulus,
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn lifted(&self) -> Vec<u64> {
        self.coeffs.iter().map(|&c| lift(c, self.modulus)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `max_i |c_i|`.
    pub fn infinity_norm(&self) -> u64 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_compatible(self, other)?;
        let h = self.modulus;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| reduce_centered(a as i128 + b as i128, h))
                .collect(),
            modulus: h,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_compatible(self, other)?;
        let h = self.modulus;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| reduce_centered(a as i128 - b as i128, h))
                .collect(),
            modulus: h,
        })
    }

    pub fn neg(&self) -> Self {
        let h = self.modulus;
        Self {
            coeffs: self.coeffs.iter().map(|&a| reduce_centered(-(a as i128), h)).collect(),
            modulus: h,
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        let h = self.modulus;
        Self {
            coeffs: self.coeffs.iter().map(|&a| reduce_centered(a as i128 * k as i128, h)).collect(),
            modulus: h,
        }
    }

    /// `d` little-endian 8-byte words, coefficients lifted to `[0, h)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(self.encoded_len());
        self.write(&mut w);
        w.finish()
    }

    pub fn encoded_len(&self) -> usize {
        8 * self.coeffs.len()
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        for &c in &self.coeffs {
            w.u64(lift(c, self.modulus));
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>, degree: usize, modulus: u64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(degree);
        for _ in 0..degree {
            let v = r.u64()?;
            if v >= modulus {
                return Err(Error::Format(format!("coefficient {v} not below modulus {modulus}")));
            }
            coeffs.push(reduce_centered(v as i128, modulus));
        }
        Ok(Self { coeffs, modulus })
    }

    pub fn from_bytes(bytes: &[u8], degree: usize, modulus: u64) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let out = Self::read(&mut r, degree, modulus)?;
        r.finish()?;
        Ok(out)
    }
}

fn check_compatible(a: &RingElement, b: &RingElement) -> Result<()> {
    if a.coeffs.len() != b.coeffs.len() || a.modulus != b.modulus {
        return Err(Error::Dimension(format!(
            "(d={}, h={}) vs (d={}, h={})",
            a.coeffs.len(),
            a.modulus,
            b.coeffs.len(),
            b.modulus
        )));
    }
    Ok(())
}

/// Coefficient of one term in a linear combination.
#[derive(Debug, Clone, Copy)]
pub enum LinearCoeff<'a> {
    Scalar(i64),
    Ring(&'a RingElement),
}

/// `[Σ α_i · v_i]_h`. Ring coefficients are multiplied by schoolbook.
pub fn ring_linear(terms: &[(LinearCoeff<'_>, &RingElement)], modulus: u64) -> Result<RingElement> {
    let Some((_, first)) = terms.first() else {
        return Err(param("empty linear combination"));
    };
    let degree = first.degree();
    let mut acc = vec![0i128; degree];
    for (alpha, v) in terms {
        if v.degree() != degree || v.modulus() != modulus {
            return Err(Error::Dimension(format!(
                "term (d={}, h={}) in combination over (d={degree}, h={modulus})",
                v.degree(),
                v.modulus()
            )));
        }
        match alpha {
            LinearCoeff::Scalar(k) => {
                let k = reduce_centered(*k as i128, modulus) as i128;
                for (a, &c) in acc.iter_mut().zip(v.coeffs()) {
                    *a = (*a + k * c as i128) % modulus as i128;
                }
            }
            LinearCoeff::Ring(p) => {
                let prod = ring_mul(p, v, modulus)?;
                for (a, &c) in acc.iter_mut().zip(prod.coeffs()) {
                    *a = (*a + c as i128) % modulus as i128;
                }
            }
        }
    }
    Ok(RingElement { coeffs: acc.into_iter().map(|a| reduce_centered(a, modulus)).collect(), modulus })
}

/// Schoolbook product in `Z_h[x]/(x^d + 1)`.
pub fn ring_mul(a: &RingElement, b: &RingElement, modulus: u64) -> Result<RingElement> {
    check_compatible(a, b)?;
    if a.modulus != modulus {
        return Err(Error::Dimension(format!("operands mod {} used with modulus {modulus}", a.modulus)));
    }
    let d = a.degree();
    // |c| < 2^61, so each product is < 2^122; reduce every row to stay in range.
    let m = modulus as i128;
    let mut acc = vec![0i128; d];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let ai = ai as i128;
        for (j, &bj) in b.coeffs.iter().enumerate() {
            let p = ai * bj as i128;
            let k = i + j;
            if k < d {
                acc[k] += p;
            } else {
                acc[k - d] -= p;
            }
        }
        if i % 16 == 15 {
            for x in acc.iter_mut() {
                *x %= m;
            }
        }
    }
    Ok(RingElement { coeffs: acc.into_iter().map(|x| reduce_centered(x, modulus)).collect(), modulus })
}

/// `⌊l·c/h⌉ mod l` per coefficient, the plaintext recovered from a noisy scaled value.
pub fn round_scale(x: &RingElement, plain_modulus: u64) -> Vec<u64> {
    let h = x.modulus() as i128;
    let l = plain_modulus as i128;
    x.coeffs()
        .iter()
        .map(|&c| {
            // round half up: ⌊(2lc + h) / 2h⌋
            let q = (2 * l * c as i128 + h).div_euclid(2 * h);
            q.rem_euclid(l) as u64
        })
        .collect()
}

/// Scheme-wide ring parameters: `(d, h, l, σ, B, a, λ)`.
#[derive(Clone)]
pub struct Params {
    degree: usize,
    modulus: u64,
    plain_modulus: u64,
    sigma: f64,
    noise_bound: u32,
    lambda: u32,
    a: RingElement,
    gaussian: Arc<GaussianTable>,
    ntt: Arc<NttTables>,
}

impl fmt::Debug for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("degree", &self.degree)
            .field("modulus", &self.modulus)
            .field("plain_modulus", &self.plain_modulus)
            .field("sigma", &self.sigma)
            .field("noise_bound", &self.noise_bound)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl Params {
    /// Validates the parameter set and samples the public element `a` uniformly.
    pub fn generate<R: RngCore + CryptoRng>(
        lambda: u32,
        degree: usize,
        modulus: u64,
        plain_modulus: u64,
        sigma: f64,
        noise_bound: u32,
        rng: &mut R,
    ) -> Result<Self> {
        Self::check(degree, modulus, plain_modulus, sigma, noise_bound)?;
        let a = sampler::uniform(degree, modulus, rng);
        Self::with_public_element(lambda, degree, modulus, plain_modulus, sigma, noise_bound, a)
    }

    pub fn with_public_element(
        lambda: u32,
        degree: usize,
        modulus: u64,
        plain_modulus: u64,
        sigma: f64,
        noise_bound: u32,
        a: RingElement,
    ) -> Result<Self> {
        Self::check(degree, modulus, plain_modulus, sigma, noise_bound)?;
        if a.degree() != degree || a.modulus() != modulus {
            return Err(Error::Dimension("public element does not match (d, h)".into()));
        }
        Ok(Self {
            degree,
            modulus,
            plain_modulus,
            sigma,
            noise_bound,
            lambda,
            a,
            gaussian: Arc::new(GaussianTable::new(sigma, noise_bound)),
            ntt: Arc::new(NttTables::new(degree, modulus)?),
        })
    }

    fn check(degree: usize, modulus: u64, plain_modulus: u64, sigma: f64, noise_bound: u32) -> Result<()> {
        if degree < 2 || !degree.is_power_of_two() {
            return Err(param(format!("ring degree {degree} is not a power of two >= 2")));
        }
        if modulus >= 1 << 62 || !modular::is_prime(modulus) {
            return Err(param(format!("ciphertext modulus {modulus} must be a prime below 2^62")));
        }
        if !(modulus - 1).is_multiple_of(2 * degree as u64) {
            return Err(param(format!("modulus {modulus} is not 1 mod {}", 2 * degree)));
        }
        if plain_modulus < 2 || plain_modulus >= modulus || modulus / plain_modulus < 2 {
            return Err(param(format!("plaintext modulus {plain_modulus} needs 2 <= l and h/l >= 2")));
        }
        if !(sigma > 0.0) || (noise_bound as f64) < (6.0 * sigma).ceil() {
            return Err(param(format!("noise bound {noise_bound} does not cover 6 sigma = {}", 6.0 * sigma)));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn plain_modulus(&self) -> u64 {
        self.plain_modulus
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise_bound(&self) -> u32 {
        self.noise_bound
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    /// The public uniform element `a`.
    pub fn public_element(&self) -> &RingElement {
        &self.a
    }

    /// Plaintext scaling factor `⌊h/l⌋`.
    pub fn delta(&self) -> u64 {
        self.modulus / self.plain_modulus
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.degree, self.modulus)
    }

    /// NTT product; bit-identical to [`ring_mul`].
    pub fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        let prod = self.ntt.multiply(&a.lifted(), &b.lifted());
        Ok(RingElement::from_lifted(&prod, self.modulus))
    }

    pub fn check_element(&self, v: &RingElement) -> Result<()> {
        if v.degree() != self.degree || v.modulus() != self.modulus {
            return Err(Error::Dimension(format!(
                "element (d={}, h={}) under params (d={}, h={})",
                v.degree(),
                v.modulus(),
                self.degree,
                self.modulus
            )));
        }
        Ok(())
    }

    pub fn sample<R: RngCore + CryptoRng>(&self, dist: Distribution, rng: &mut R) -> RingElement {
        sample(self, dist, rng)
    }
}

/// Draws a ring element from one of the scheme's distributions.
pub fn sample<R: RngCore + CryptoRng>(params: &Params, dist: Distribution, rng: &mut R) -> RingElement {
    let (d, h) = (params.degree, params.modulus);
    match dist {
        Distribution::UniformH => sampler::uniform(d, h, rng),
        Distribution::Ternary => sampler::ternary(d, h, rng),
        Distribution::Gaussian => sampler::gaussian(&params.gaussian, d, h, rng),
    }
}
