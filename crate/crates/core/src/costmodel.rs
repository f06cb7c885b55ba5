//! Per-user communication accounting for five ways of building a threshold
//! additive scheme, plus a comparison of the analytic sizes against what a
//! simulated run actually sent.
//!
//! Sizes are in bytes. `|m_u|` is the input dimension. `LR = d·|h|/8` is one
//! packed ring element, `LN = ⌈dim/d⌉` the number of ciphertext blocks, and
//! `SN = C(n−1, t−1)` the number of share sets a user receives under
//! replicated sharing.
//!
//! | construction | `|e_{v,u}|`     | `|c_u|`      | `|m̂_u|`       |
//! |--------------|-----------------|--------------|---------------|
//! | pedersen     | `33+32`         | `66·|m_u|`   | `33·|m_u|`    |
//! | bd           | `33+LR·SN`      | `2·LR·LN`    | `LR·LN·SN`    |
//! | bggjk1       | `33+LR·n⁴`      | `2·LR·LN`    | `LR·LN·n⁴`    |
//! | bggjk2       | `33+LR′`        | `2·LR′·LN′`  | `LR′·LN′`     |
//! | ours         | `33+LR·(1+LN)`  | `2·LR·LN`    | `LR·LN`       |
//!
//! The per-user total over the four rounds is
//! `(n+2)|u| + (n−1)|e_{v,u}| + |c_u| + |m̂_u| + 3|acc_u| + |T_u| + |σ_u| + |Sig| + |cert_u| + |aux| + |Record| + |esid|`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::chain::{Call, Esid};
use crate::crypto::{POINT_LEN, SIGNATURE_LEN};
use crate::error::{param, Error, Result};
use crate::protocol::driver::CA_NAME;
use crate::protocol::transport::Transcript;
use crate::scheme::SchemeKind;

/// Standard ring degrees and the largest modulus (bits) each admits at 128-bit security.
pub const DEGREE_TABLE: [(u64, u64); 4] = [(2048, 54), (4096, 109), (8192, 218), (16384, 438)];

/// `|h′(35)| = 426` anchors the BGGJK-2 modulus growth.
pub const BGGJK2_ANCHOR: (u64, u64) = (35, 426);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Pedersen,
    Bd,
    Bggjk1,
    Bggjk2,
    Ours,
}

impl Construction {
    pub const ALL: [Construction; 5] =
        [Construction::Pedersen, Construction::Bd, Construction::Bggjk1, Construction::Bggjk2, Construction::Ours];

    pub fn name(self) -> &'static str {
        match self {
            Construction::Pedersen => "pedersen",
            Construction::Bd => "bd",
            Construction::Bggjk1 => "bggjk1",
            Construction::Bggjk2 => "bggjk2",
            Construction::Ours => "ours",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Construction::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| param(format!("unknown construction {s:?}")))
    }
}

/// Ring degree and modulus size of the lattice constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSize {
    pub degree: u64,
    pub modulus_bits: u64,
}

impl Default for RingSize {
    fn default() -> Self {
        Self { degree: 2048, modulus_bits: 54 }
    }
}

impl RingSize {
    /// `LR = d·|h|/8`.
    pub fn element_bytes(&self) -> u64 {
        self.degree * self.modulus_bits / 8
    }

    /// `LN = ⌈dim/d⌉`.
    pub fn blocks(&self, dim: u64) -> u64 {
        dim.div_ceil(self.degree)
    }
}

/// How the BGGJK-2 modulus grows with `n`. Both are pinned to
/// [`BGGJK2_ANCHOR`]; `g(n) = ⌈log₂((n!)²)⌉`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    /// `|h′| = |h| + ⌈(426 − |h|)·g(n)/g(35)⌉`.
    #[default]
    Scaled,
    /// `|h′| = |h| + g(n) + (426 − |h| − g(35))`.
    Additive,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Scaled => "scaled",
            Calibration::Additive => "additive",
        })
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// `⌈log₂((n!)²)⌉`, exactly.
pub fn factorial_square_bits(n: u64) -> u64 {
    let sq = factorial(n).pow(2);
    if sq <= BigUint::from(1u32) {
        return 0;
    }
    (sq - 1u32).bits()
}

/// BGGJK-2 ring parameters at `n` users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bggjk2Params {
    pub n: u64,
    pub calibration: Calibration,
    pub modulus_bits: u64,
    pub degree: u64,
    /// `LR′`.
    pub element_bytes: u64,
    /// `LN′`.
    pub blocks: u64,
}

pub fn bggjk2_modulus_bits(n: u64, base: RingSize, calibration: Calibration) -> Result<u64> {
    if n < 2 {
        return Err(param(format!("BGGJK-2 needs at least 2 users, got {n}")));
    }
    let (anchor_n, anchor_bits) = BGGJK2_ANCHOR;
    if base.modulus_bits > anchor_bits {
        return Err(param(format!("base modulus {} bits above the anchor", base.modulus_bits)));
    }
    let g = factorial_square_bits(n);
    let g_anchor = factorial_square_bits(anchor_n);
    let span = anchor_bits - base.modulus_bits;
    Ok(match calibration {
        Calibration::Scaled => base.modulus_bits + (span * g).div_ceil(g_anchor),
        Calibration::Additive => (base.modulus_bits + g + span).saturating_sub(g_anchor),
    })
}

/// Smallest table degree whose modulus budget admits `bits`.
pub fn degree_for(bits: u64) -> Option<u64> {
    DEGREE_TABLE.iter().find(|&&(_, max)| bits <= max).map(|&(d, _)| d)
}

pub fn bggjk2_params(n: u64, dim: u64, base: RingSize, calibration: Calibration) -> Result<Bggjk2Params> {
    let modulus_bits = bggjk2_modulus_bits(n, base, calibration)?;
    let degree = degree_for(modulus_bits).ok_or_else(|| {
        Error::Unsupported(format!("BGGJK-2 at n={n} needs a {modulus_bits}-bit modulus, beyond every table degree"))
    })?;
    let ring = RingSize { degree, modulus_bits };
    Ok(Bggjk2Params { n, calibration, modulus_bits, degree, element_bytes: ring.element_bytes(), blocks: ring.blocks(dim) })
}

/// `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

/// Fixed-size fields of the per-user total, taken from this crate's encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSizes {
    /// `|u|`: user id.
    pub user: u64,
    /// `|acc_u|`: account id.
    pub account: u64,
    /// `|T_u|`: advert timestamp.
    pub timestamp: u64,
    /// `|σ_u|`: advert signature.
    pub advert_signature: u64,
    /// `|Sig|`: transaction signature.
    pub tx_signature: u64,
    /// `|cert_u|`.
    pub certificate: u64,
    /// `|aux|`: the empty aux field's length prefix.
    pub aux: u64,
    /// `|Record|`: call name and argument framing around the session id and cipher.
    pub record: u64,
    /// `|esid|`.
    pub esid: u64,
}

impl Default for AuxSizes {
    fn default() -> Self {
        let esid = std::mem::size_of::<Esid>() as u64;
        let record = Call::Record { esid: [0; 16], cipher: Vec::new() }.encode().len() as u64 - esid;
        let certificate = (4 + 4) + (4 + POINT_LEN) + (4 + CA_NAME.len()) + (4 + SIGNATURE_LEN);
        Self {
            user: 4,
            account: 4,
            timestamp: 8,
            advert_signature: SIGNATURE_LEN as u64,
            tx_signature: SIGNATURE_LEN as u64,
            certificate: certificate as u64,
            aux: 4,
            record,
            esid,
        }
    }
}

impl AuxSizes {
    /// Everything in the per-user total except the share, cipher, and partial components.
    pub fn total(&self, n: u64) -> u64 {
        (n + 2) * self.user
            + 3 * self.account
            + self.timestamp
            + self.advert_signature
            + self.tx_signature
            + self.certificate
            + self.aux
            + self.record
            + self.esid
    }
}

/// Per-user communication of one construction at `(n, t, dim)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostBreakdown {
    pub construction: Construction,
    pub n: u64,
    pub t: u64,
    pub dim: u64,
    pub lr: u64,
    pub ln: u64,
    pub sn: BigUint,
    pub bggjk2: Option<Bggjk2Params>,
    /// `|e_{v,u}|`.
    pub share: BigUint,
    /// `|c_u|`.
    pub cipher: BigUint,
    /// `|m̂_u|`.
    pub partial: BigUint,
    pub aux: AuxSizes,
    pub total: BigUint,
}

/// Knobs shared by every row of a cost report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostParams {
    pub ring: RingSize,
    pub calibration: Calibration,
    pub aux: AuxSizes,
}

pub fn comm_cost(construction: Construction, n: u64, t: u64, dim: u64, params: &CostParams) -> Result<CostBreakdown> {
    if t < 1 || t > n {
        return Err(param(format!("need n ≥ t ≥ 1, got n={n}, t={t}")));
    }
    let big = BigUint::from;
    let lr = params.ring.element_bytes();
    let ln = params.ring.blocks(dim);
    let sn = binomial(n - 1, t - 1);
    let point = POINT_LEN as u64;
    let mut bggjk2 = None;
    let (share, cipher, partial) = match construction {
        Construction::Pedersen => (big(point + 32), big(2 * point * dim), big(point * dim)),
        Construction::Bd => (big(point) + big(lr) * &sn, big(2 * lr * ln), big(lr * ln) * &sn),
        Construction::Bggjk1 => {
            let n4 = big(n).pow(4);
            (big(point) + big(lr) * &n4, big(2 * lr * ln), big(lr * ln) * n4)
        }
        Construction::Bggjk2 => {
            let p = bggjk2_params(n, dim, params.ring, params.calibration)?;
            bggjk2 = Some(p);
            (big(point + p.element_bytes), big(2 * p.element_bytes * p.blocks), big(p.element_bytes * p.blocks))
        }
        Construction::Ours => (big(point + lr * (1 + ln)), big(2 * lr * ln), big(lr * ln)),
    };
    let total = big(n - 1) * &share + &cipher + &partial + big(params.aux.total(n));
    Ok(CostBreakdown { construction, n, t, dim, lr, ln, sn, bggjk2, share, cipher, partial, aux: params.aux, total })
}

/// One line of a cost report. Big quantities are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRow {
    pub scheme: String,
    pub n: u64,
    pub t: u64,
    pub dim: u64,
    /// `closed_form`, or `calibrated_<mode>` for BGGJK-2.
    pub model: String,
    pub status: String,
    pub lr: Option<u64>,
    pub ln: Option<u64>,
    pub sn: Option<String>,
    pub lr_prime: Option<u64>,
    pub ln_prime: Option<u64>,
    pub modulus_bits_prime: Option<u64>,
    pub degree_prime: Option<u64>,
    pub e_vu: Option<String>,
    pub c_u: Option<String>,
    pub m_hat_u: Option<String>,
    pub aux: Option<u64>,
    pub total: Option<String>,
}

fn model_label(construction: Construction, calibration: Calibration) -> String {
    match construction {
        Construction::Bggjk2 => format!("calibrated_{calibration}"),
        _ => "closed_form".into(),
    }
}

impl CostBreakdown {
    pub fn row(&self) -> CostRow {
        let calibration = self.bggjk2.map_or(Calibration::default(), |p| p.calibration);
        CostRow {
            scheme: self.construction.to_string(),
            n: self.n,
            t: self.t,
            dim: self.dim,
            model: model_label(self.construction, calibration),
            status: "ok".into(),
            lr: Some(self.lr),
            ln: Some(self.ln),
            sn: Some(self.sn.to_string()),
            lr_prime: self.bggjk2.map(|p| p.element_bytes),
            ln_prime: self.bggjk2.map(|p| p.blocks),
            modulus_bits_prime: self.bggjk2.map(|p| p.modulus_bits),
            degree_prime: self.bggjk2.map(|p| p.degree),
            e_vu: Some(self.share.to_string()),
            c_u: Some(self.cipher.to_string()),
            m_hat_u: Some(self.partial.to_string()),
            aux: Some(self.aux.total(self.n)),
            total: Some(self.total.to_string()),
        }
    }
}

/// Rows for every construction and `n` in `ns`, with `t = ⌈2n/3⌉`.
/// Unsupported points become rows with `status = "unsupported: …"`.
pub fn sweep(constructions: &[Construction], ns: impl IntoIterator<Item = u64> + Clone, dim: u64, params: &CostParams) -> Vec<CostRow> {
    let mut rows = Vec::new();
    for &c in constructions {
        for n in ns.clone() {
            let t = (2 * n).div_ceil(3);
            match comm_cost(c, n, t, dim, params) {
                Ok(b) => rows.push(b.row()),
                Err(e) => rows.push(CostRow {
                    scheme: c.to_string(),
                    n,
                    t,
                    dim,
                    model: model_label(c, params.calibration),
                    status: format!("unsupported: {e}"),
                    lr: None,
                    ln: None,
                    sn: None,
                    lr_prime: None,
                    ln_prime: None,
                    modulus_bits_prime: None,
                    degree_prime: None,
                    e_vu: None,
                    c_u: None,
                    m_hat_u: None,
                    aux: None,
                    total: None,
                }),
            }
        }
    }
    rows
}

/// Smallest `n` in `ns` from which `ours` is strictly cheaper than BGGJK-2 at
/// every later supported point, if ours is ever cheaper.
pub fn crossover(ns: impl IntoIterator<Item = u64>, dim: u64, params: &CostParams) -> Option<u64> {
    let mut first = None;
    for n in ns {
        let t = (2 * n).div_ceil(3);
        let ours = comm_cost(Construction::Ours, n, t, dim, params).ok()?;
        let Ok(theirs) = comm_cost(Construction::Bggjk2, n, t, dim, params) else { continue };
        match (ours.total < theirs.total, first) {
            (true, None) => first = Some(n),
            (false, Some(_)) => first = None,
            _ => {}
        }
    }
    first
}

/// Transcript sizes predicted for one run of this crate's schemes. Ring
/// elements travel as 8-byte words, so the lattice model uses `LR = 8d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireModel {
    pub scheme: SchemeKind,
    pub degree: u64,
    pub dim: u64,
}

impl WireModel {
    fn component(&self, component: &str) -> u64 {
        let point = POINT_LEN as u64;
        match self.scheme {
            SchemeKind::Lattice => {
                let lr = 8 * self.degree;
                let ln = self.dim.div_ceil(self.degree);
                match component {
                    "e_vu" => point + lr * (1 + ln),
                    "c_u" => 2 * lr * ln,
                    _ => lr * ln,
                }
            }
            SchemeKind::EcElgamal => match component {
                "e_vu" => point + 32,
                "c_u" => 2 * point * self.dim,
                _ => point * self.dim,
            },
        }
    }
}

/// Measured payload of one component against its model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub component: String,
    /// Number of objects observed.
    pub items: usize,
    pub messages: usize,
    /// Largest per-object payload observed.
    pub measured: u64,
    pub model: u64,
    /// `measured − model`; the per-object framing this crate adds.
    pub deviation: i64,
    /// Largest per-message overhead beyond the carried objects.
    pub max_message_framing: u64,
}

const COMPONENT_KINDS: [(&str, &[&str]); 3] =
    [("e_vu", &["shares"]), ("c_u", &["cipher", "tx_record"]), ("m_hat_u", &["partial"])];

/// Compares a run's transcript with the wire model, per component.
pub fn measured_vs_model(transcript: &Transcript, model: &WireModel) -> Vec<Deviation> {
    COMPONENT_KINDS
        .iter()
        .map(|&(component, kinds)| {
            let records: Vec<_> = transcript.records().iter().filter(|r| kinds.contains(&r.kind.as_str())).collect();
            let items: usize = records.iter().map(|r| r.items).sum();
            let per_object: BTreeMap<u64, usize> = records
                .iter()
                .filter(|r| r.items > 0)
                .map(|r| ((r.payload / r.items) as u64, r.items))
                .collect();
            let measured = per_object.keys().next_back().copied().unwrap_or(0);
            let expected = if items == 0 { 0 } else { model.component(component) };
            Deviation {
                component: component.to_string(),
                items,
                messages: records.len(),
                measured,
                model: expected,
                deviation: measured as i64 - expected as i64,
                max_message_framing: records.iter().map(|r| (r.bytes - r.payload) as u64).max().unwrap_or(0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(c: Construction, n: u64) -> CostBreakdown {
        comm_cost(c, n, (2 * n).div_ceil(3), 100_000, &CostParams::default()).unwrap()
    }

    #[test]
    fn ring_quantities() {
        let r = RingSize::default();
        assert_eq!(r.element_bytes(), 13_824);
        assert_eq!(r.blocks(100_000), 49);
        assert_eq!(r.blocks(0), 0);
    }

    #[test]
    fn table_cells_at_35_users() {
        let ours = at(Construction::Ours, 35);
        assert_eq!(ours.t, 24);
        assert_eq!(ours.share, BigUint::from(691_233u64));
        assert_eq!(ours.cipher, BigUint::from(2 * 13_824 * 49u64));
        assert_eq!(ours.partial, BigUint::from(677_376u64));

        let ped = at(Construction::Pedersen, 35);
        assert_eq!(ped.share, BigUint::from(65u32));
        assert_eq!(ped.cipher, BigUint::from(6_600_000u64));
        assert_eq!(ped.partial, BigUint::from(3_300_000u64));

        let bd = at(Construction::Bd, 35);
        assert_eq!(bd.sn, BigUint::from(286_097_760u64));
        assert_eq!(bd.share, BigUint::from(33u32) + BigUint::from(13_824u64) * 286_097_760u64);
        assert_eq!(bd.partial, BigUint::from(677_376u64) * 286_097_760u64);

        let b1 = at(Construction::Bggjk1, 35);
        assert_eq!(b1.share, BigUint::from(33 + 13_824 * 35u64.pow(4)));

        let b2 = at(Construction::Bggjk2, 35);
        let p = b2.bggjk2.unwrap();
        assert_eq!((p.modulus_bits, p.degree, p.element_bytes, p.blocks), (426, 16_384, 872_448, 7));
        assert_eq!(b2.cipher, BigUint::from(2 * 872_448 * 7u64));
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial(34, 23), BigUint::from(286_097_760u64));
        assert_eq!(binomial(5, 0), BigUint::from(1u32));
        assert_eq!(binomial(3, 5), BigUint::from(0u32));
        assert_eq!(factorial_square_bits(2), 2);
        assert_eq!(factorial_square_bits(3), 6);
        assert_eq!(factorial_square_bits(35), 266);
        let huge = at(Construction::Bd, 200);
        assert!(huge.sn.bits() > 64);
    }

    #[test]
    fn bggjk2_calibrations_share_the_anchor() {
        let base = RingSize::default();
        for cal in [Calibration::Scaled, Calibration::Additive] {
            assert_eq!(bggjk2_modulus_bits(35, base, cal).unwrap(), 426);
        }
        assert_eq!(bggjk2_modulus_bits(2, base, Calibration::Additive).unwrap(), 54 + 2 + 106);
        assert_eq!(bggjk2_modulus_bits(2, base, Calibration::Scaled).unwrap(), 54 + 3);
        assert!(bggjk2_modulus_bits(1, base, Calibration::Scaled).is_err());
        assert!(matches!(bggjk2_params(40, 100_000, base, Calibration::Scaled), Err(Error::Unsupported(_))));
        assert_eq!(degree_for(54), Some(2048));
        assert_eq!(degree_for(55), Some(4096));
        assert_eq!(degree_for(439), None);
    }

    #[test]
    fn scaled_crossover_is_in_window() {
        let params = CostParams::default();
        let n = crossover(2..=35, 100_000, &params).unwrap();
        assert!((20..=35).contains(&n), "crossover at {n}");
        let additive = CostParams { calibration: Calibration::Additive, ..params };
        assert_eq!(crossover(2..=35, 100_000, &additive), Some(2));
    }

    #[test]
    fn ordering_at_35_users() {
        let ped = at(Construction::Pedersen, 35).total;
        let ours = at(Construction::Ours, 35).total;
        let b2 = at(Construction::Bggjk2, 35).total;
        assert!(ped < ours && ours < b2);
    }

    #[test]
    fn components_grow_with_n_and_dim() {
        let params = CostParams::default();
        for c in Construction::ALL {
            let mut prev: Option<CostBreakdown> = None;
            for n in 2..=35 {
                let cur = comm_cost(c, n, (2 * n).div_ceil(3), 100_000, &params).unwrap();
                if let Some(p) = &prev {
                    assert!(cur.share >= p.share && cur.cipher >= p.cipher && cur.total >= p.total, "{c} at {n}");
                }
                prev = Some(cur);
            }
            let small = comm_cost(c, 10, 7, 1_000, &params).unwrap();
            let large = comm_cost(c, 10, 7, 100_000, &params).unwrap();
            assert!(large.cipher >= small.cipher && large.partial >= small.partial);
        }
    }

    #[test]
    fn total_itemizes_fixed_fields() {
        let b = at(Construction::Ours, 5);
        let aux = AuxSizes::default();
        assert_eq!(aux.record, 22);
        assert_eq!(aux.certificate, 131);
        let expected = BigUint::from(4u32) * &b.share + &b.cipher + &b.partial + BigUint::from(aux.total(5));
        assert_eq!(b.total, expected);
        assert_eq!(aux.total(5), 7 * 4 + 3 * 4 + 8 + 64 + 64 + 131 + 4 + 22 + 16);
    }

    #[test]
    fn sweep_marks_unsupported_rows() {
        let rows = sweep(&[Construction::Bggjk2], 34..=37, 100_000, &CostParams::default());
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].status, "ok");
        assert!(rows[3].status.starts_with("unsupported"));
        assert_eq!(rows[1].model, "calibrated_scaled");
        let zero = sweep(&[Construction::Ours], [5], 0, &CostParams::default());
        assert_eq!(zero[0].c_u.as_deref(), Some("0"));
    }

    #[test]
    fn construction_names_round_trip() {
        for c in Construction::ALL {
            assert_eq!(c.name().parse::<Construction>().unwrap(), c);
        }
        assert!("bfv".parse::<Construction>().is_err());
    }

    #[test]
    fn empty_transcript_has_zero_payload() {
        let model = WireModel { scheme: SchemeKind::Lattice, degree: 64, dim: 10 };
        for d in measured_vs_model(&Transcript::default(), &model) {
            assert_eq!((d.items, d.measured, d.model, d.deviation), (0, 0, 0, 0));
        }
    }
}
