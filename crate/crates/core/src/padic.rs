//! Finite-precision p-adic scalars and unramified extensions.
//!
//! A nonzero scalar is stored as `p^val · unit + O(p^(val+prec))` with the
//! unit coprime to p; `prec` counts known significant digits. Exactly known
//! integers (structure constants, matrix entries like 0, 1, p^d) carry the
//! sentinel precision [`EXACT`] so they never degrade results they touch.
//! Cancellation that eats every known digit produces an explicit `O(p^k)`
//! value rather than a fake zero, and every operation propagates precision
//! conservatively: no result ever claims more digits than its inputs justify.
//!
//! The unramified extension of degree h is Q_p[x]/(g) for the canonical
//! monic lift g of the [`crate::ffield`] modulus. Its Frobenius σ is the
//! unique ring automorphism reducing to x ↦ x^p; it is realized by Hensel
//! lifting the p-power map on the class of x and cached in the context, so
//! applying σ is a linear substitution. Contexts are immutable and shared
//! behind `Arc`; elements are plain data.

use crate::ffield::{find_modulus, FqContext, FqElement};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Default working precision in p-adic digits.
pub const DEFAULT_PRECISION: u32 = 32;

/// Sentinel precision for exactly known values.
pub const EXACT: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("DivisionByZero: inverse of exact zero")]
    DivisionByZero,
    #[error("PrecisionExhausted: {0}")]
    PrecisionExhausted(String),
    #[error("ContextMismatch: operands belong to different extensions")]
    ContextMismatch,
}

impl PadicError {
    pub fn variant(&self) -> &'static str {
        match self {
            PadicError::DivisionByZero => "DivisionByZero",
            PadicError::PrecisionExhausted(_) => "PrecisionExhausted",
            PadicError::ContextMismatch => "ContextMismatch",
        }
    }
}

/// What is known about a valuation at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    AtLeast(i64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// Exact zero.
    Zero,
    /// O(p^val): divisible by p^val, nothing else known.
    BigO { val: i64 },
    /// p^val · unit + O(p^(val+prec)); unit coprime to p. With `prec == EXACT`
    /// the unit is an exact (possibly negative) integer.
    Unit { val: i64, unit: BigInt, prec: u32 },
}

/// A p-adic scalar with tracked precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    repr: Repr,
}

fn p_pow(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

fn strip_p(mut n: BigInt, p: u64) -> (BigInt, i64) {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return (n, v);
        }
        n = q;
        v += 1;
    }
}

fn mod_inv(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    let mut x = e.x % m;
    if x.is_negative() {
        x += m;
    }
    x
}

impl PadicNumber {
    pub fn zero(p: u64) -> Self {
        PadicNumber { p, repr: Repr::Zero }
    }

    /// An exactly known integer.
    pub fn from_integer(p: u64, n: i64) -> Self {
        Self::from_bigint(p, BigInt::from(n))
    }

    pub fn from_bigint(p: u64, n: BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(p);
        }
        let (unit, val) = strip_p(n, p);
        PadicNumber {
            p,
            repr: Repr::Unit {
                val,
                unit,
                prec: EXACT,
            },
        }
    }

    /// p^k, exactly.
    pub fn p_power(p: u64, k: i64) -> Self {
        PadicNumber {
            p,
            repr: Repr::Unit {
                val: k,
                unit: BigInt::one(),
                prec: EXACT,
            },
        }
    }

    /// A rational number. Exact when the denominator is ±p^k; otherwise the
    /// unit is materialized at `prec` digits.
    pub fn from_ratio(p: u64, r: &crate::rat::Rat, prec: u32) -> Self {
        if r.is_zero() {
            return Self::zero(p);
        }
        let (num_unit, vn) = strip_p(r.numer().clone(), p);
        let (den_unit, vd) = strip_p(r.denom().clone(), p);
        let val = vn - vd;
        if den_unit.abs().is_one() {
            let unit = if den_unit.is_negative() {
                -num_unit
            } else {
                num_unit
            };
            return PadicNumber {
                p,
                repr: Repr::Unit {
                    val,
                    unit,
                    prec: EXACT,
                },
            };
        }
        let modulus = p_pow(p, prec);
        let mut unit = (num_unit * mod_inv(&den_unit, &modulus)) % &modulus;
        if unit.is_negative() {
            unit += &modulus;
        }
        PadicNumber {
            p,
            repr: Repr::Unit { val, unit, prec },
        }
    }

    /// The unknown value O(p^k).
    pub fn big_o(p: u64, k: i64) -> Self {
        PadicNumber {
            p,
            repr: Repr::BigO { val: k },
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// True when no nonzero digit is known: exact zero or O(p^k).
    pub fn is_zero_to_prec(&self) -> bool {
        matches!(self.repr, Repr::Zero | Repr::BigO { .. })
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero => Valuation::Infinite,
            Repr::BigO { val } => Valuation::AtLeast(*val),
            Repr::Unit { val, .. } => Valuation::Exact(*val),
        }
    }

    /// Known significant digits; `EXACT` for exact values, 0 for O(p^k).
    pub fn precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero => EXACT,
            Repr::BigO { .. } => 0,
            Repr::Unit { prec, .. } => *prec,
        }
    }

    /// Absolute precision p^k below which nothing is known; `None` = exact.
    fn abs_precision(&self) -> Option<i128> {
        match &self.repr {
            Repr::Zero => None,
            Repr::BigO { val } => Some(*val as i128),
            Repr::Unit { val, prec, .. } => {
                if *prec == EXACT {
                    None
                } else {
                    Some(*val as i128 + *prec as i128)
                }
            }
        }
    }

    /// Truncates to at most `prec` known digits.
    pub fn with_precision(&self, prec: u32) -> Self {
        match &self.repr {
            Repr::Zero | Repr::BigO { .. } => self.clone(),
            Repr::Unit { val, unit, prec: old } => {
                if *old <= prec {
                    return self.clone();
                }
                let modulus = p_pow(self.p, prec);
                let mut u = unit % &modulus;
                if u.is_negative() {
                    u += &modulus;
                }
                if u.is_zero() {
                    // only for EXACT units divisible by nothing: unit is coprime
                    // to p and nonzero, so u == 0 cannot occur for prec >= 1
                    return Self::big_o(self.p, val + prec as i64);
                }
                PadicNumber {
                    p: self.p,
                    repr: Repr::Unit {
                        val: *val,
                        unit: u,
                        prec,
                    },
                }
            }
        }
    }

    fn check_same_p(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixed primes in p-adic arithmetic");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_p(other);
        let p = self.p;
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) => other.clone(),
            (_, Repr::Zero) => self.clone(),
            (Repr::BigO { val: k }, Repr::BigO { val: j }) => Self::big_o(p, *k.min(j)),
            (Repr::BigO { val: k }, Repr::Unit { .. }) => add_bigo_unit(p, *k, other),
            (Repr::Unit { .. }, Repr::BigO { val: k }) => add_bigo_unit(p, *k, self),
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: n2,
                },
            ) => {
                if *n1 == EXACT && *n2 == EXACT {
                    let m = (*v1).min(*v2);
                    let s = u1 * p_pow(p, (*v1 - m) as u32) + u2 * p_pow(p, (*v2 - m) as u32);
                    if s.is_zero() {
                        return Self::zero(p);
                    }
                    let (unit, extra) = strip_p(s, p);
                    return PadicNumber {
                        p,
                        repr: Repr::Unit {
                            val: m + extra,
                            unit,
                            prec: EXACT,
                        },
                    };
                }
                let m = (*v1).min(*v2);
                let abs = match (self.abs_precision(), other.abs_precision()) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!(),
                };
                let rel = (abs - m as i128) as u32; // ≥ 1: abs > val of each operand
                let modulus = p_pow(p, rel);
                let mut s = (u1 * p_pow(p, (*v1 - m) as u32) + u2 * p_pow(p, (*v2 - m) as u32))
                    % &modulus;
                if s.is_negative() {
                    s += &modulus;
                }
                if s.is_zero() {
                    return Self::big_o(p, m + rel as i64);
                }
                let (unit, extra) = strip_p(s, p);
                PadicNumber {
                    p,
                    repr: Repr::Unit {
                        val: m + extra,
                        unit,
                        prec: rel - extra as u32,
                    },
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero | Repr::BigO { .. } => self.clone(),
            Repr::Unit { val, unit, prec } => {
                let u = if *prec == EXACT {
                    -unit
                } else {
                    p_pow(self.p, *prec) - unit
                };
                PadicNumber {
                    p: self.p,
                    repr: Repr::Unit {
                        val: *val,
                        unit: u,
                        prec: *prec,
                    },
                }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_p(other);
        let p = self.p;
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => Self::zero(p),
            (Repr::BigO { val: k }, Repr::BigO { val: j }) => Self::big_o(p, k + j),
            (Repr::BigO { val: k }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::BigO { val: k }) => Self::big_o(p, k + val),
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: n2,
                },
            ) => {
                let val = v1 + v2;
                let prec = (*n1).min(*n2);
                let mut unit = u1 * u2;
                if prec != EXACT {
                    let modulus = p_pow(p, prec);
                    unit %= &modulus;
                    if unit.is_negative() {
                        unit += &modulus;
                    }
                }
                PadicNumber {
                    p,
                    repr: Repr::Unit { val, unit, prec },
                }
            }
        }
    }

    /// Inverse. Exact inputs are materialized at `prec_hint` digits unless the
    /// unit is ±1 (then the inverse is exact again).
    pub fn inv_with(&self, prec_hint: u32) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero => Err(PadicError::DivisionByZero),
            Repr::BigO { val } => Err(PadicError::PrecisionExhausted(format!(
                "inverse of O(p^{val}): no known digit"
            ))),
            Repr::Unit { val, unit, prec } => {
                if *prec == EXACT && unit.abs().is_one() {
                    return Ok(PadicNumber {
                        p: self.p,
                        repr: Repr::Unit {
                            val: -val,
                            unit: unit.clone(),
                            prec: EXACT,
                        },
                    });
                }
                let target = if *prec == EXACT { prec_hint } else { *prec };
                let modulus = p_pow(self.p, target);
                let mut u = unit % &modulus;
                if u.is_negative() {
                    u += &modulus;
                }
                Ok(PadicNumber {
                    p: self.p,
                    repr: Repr::Unit {
                        val: -val,
                        unit: mod_inv(&u, &modulus),
                        prec: target,
                    },
                })
            }
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        self.inv_with(DEFAULT_PRECISION)
    }

    /// Multiplies by p^k (exact shift of the valuation).
    pub fn shift(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::BigO { val } => Self::big_o(self.p, val + k),
            Repr::Unit { val, unit, prec } => PadicNumber {
                p: self.p,
                repr: Repr::Unit {
                    val: val + k,
                    unit: unit.clone(),
                    prec: *prec,
                },
            },
        }
    }

    /// True when the difference carries no known nonzero digit.
    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.sub(other).is_zero_to_prec()
    }

    /// Residue mod p for p-integral values; `None` when the valuation sign is
    /// unknown or negative.
    pub fn reduce_mod_p(&self) -> Option<u64> {
        match &self.repr {
            Repr::Zero => Some(0),
            Repr::BigO { val } => (*val >= 1).then_some(0),
            Repr::Unit { val, unit, .. } => {
                if *val > 0 {
                    Some(0)
                } else if *val == 0 {
                    let p = BigInt::from(self.p);
                    let mut r = unit % &p;
                    if r.is_negative() {
                        r += &p;
                    }
                    Some(u64::try_from(r).unwrap())
                } else {
                    None
                }
            }
        }
    }

    /// Base-p digits of the unit, lowest first, padded/truncated to `n`.
    pub fn unit_digits(&self, n: u32) -> Vec<u64> {
        match &self.repr {
            Repr::Zero | Repr::BigO { .. } => vec![],
            Repr::Unit { unit, .. } => {
                let modulus = p_pow(self.p, n);
                let mut u = unit % &modulus;
                if u.is_negative() {
                    u += &modulus;
                }
                let p = BigInt::from(self.p);
                let mut digits = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let (q, r) = u.div_rem(&p);
                    digits.push(u64::try_from(r).unwrap());
                    u = q;
                }
                digits
            }
        }
    }
}

fn add_bigo_unit(p: u64, k: i64, unit_side: &PadicNumber) -> PadicNumber {
    let Repr::Unit { val, unit, prec } = &unit_side.repr else {
        unreachable!()
    };
    if *val >= k {
        return PadicNumber::big_o(p, k);
    }
    let abs = match unit_side.abs_precision() {
        Some(a) => a.min(k as i128),
        None => k as i128,
    };
    let rel = (abs - *val as i128) as u32; // ≥ 1 since val < k
    let capped = PadicNumber {
        p,
        repr: Repr::Unit {
            val: *val,
            unit: unit.clone(),
            prec: *prec,
        },
    };
    capped.with_precision(rel)
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::BigO { val } => write!(f, "O({}^{})", self.p, val),
            Repr::Unit { val, unit, prec } => {
                if *prec == EXACT {
                    if *val == 0 {
                        write!(f, "{unit}")
                    } else {
                        write!(f, "{}^{} * {}", self.p, val, unit)
                    }
                } else {
                    write!(
                        f,
                        "{}^{} * {} + O({}^{})",
                        self.p,
                        val,
                        unit,
                        self.p,
                        val + *prec as i64
                    )
                }
            }
        }
    }
}

// JSON encoding: {"p":7,"val":-1,"unit_digits":[...],"prec":32}.
// Exact zero uses {"p":7,"zero":true}; O(p^k) has prec 0 and no digits.
#[derive(Serialize, Deserialize)]
struct PadicJson {
    p: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    zero: bool,
    #[serde(default)]
    val: i64,
    #[serde(default)]
    unit_digits: Vec<u64>,
    #[serde(default)]
    prec: u32,
}

impl Serialize for PadicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let json = match &self.repr {
            Repr::Zero => PadicJson {
                p: self.p,
                zero: true,
                val: 0,
                unit_digits: vec![],
                prec: 0,
            },
            Repr::BigO { val } => PadicJson {
                p: self.p,
                zero: false,
                val: *val,
                unit_digits: vec![],
                prec: 0,
            },
            Repr::Unit { val, prec, .. } => {
                let n = if *prec == EXACT { DEFAULT_PRECISION } else { *prec };
                PadicJson {
                    p: self.p,
                    zero: false,
                    val: *val,
                    unit_digits: self.unit_digits(n),
                    prec: n,
                }
            }
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let json = PadicJson::deserialize(d)?;
        if json.zero {
            return Ok(PadicNumber::zero(json.p));
        }
        if json.unit_digits.is_empty() {
            return Ok(PadicNumber::big_o(json.p, json.val));
        }
        let mut unit = BigInt::zero();
        for &d in json.unit_digits.iter().rev() {
            if d >= json.p {
                return Err(D::Error::custom("digit out of range"));
            }
            unit = unit * BigInt::from(json.p) + BigInt::from(d);
        }
        if (unit.clone() % BigInt::from(json.p)).is_zero() {
            return Err(D::Error::custom("unit digits must not be divisible by p"));
        }
        let prec = if json.prec == 0 {
            json.unit_digits.len() as u32
        } else {
            json.prec
        };
        Ok(PadicNumber {
            p: json.p,
            repr: Repr::Unit {
                val: json.val,
                unit,
                prec,
            },
        })
    }
}

// ---------------------------------------------------------------------------
// Unramified extensions
// ---------------------------------------------------------------------------

/// Shared description of Q_{p^h}: the prime, the degree, the working
/// precision, the integer lift of the canonical modulus, and the cached
/// powers of the Frobenius image of the generator.
#[derive(Debug)]
pub struct UnramifiedContext {
    p: u64,
    h: u32,
    prec: u32,
    modulus: Vec<u64>,
    residue_field: FqContext,
    /// σ(ω)^i for i = 0..h, as coefficient vectors in the ω-basis.
    frob_pows: Vec<Vec<PadicNumber>>,
}

/// An element of Q_{p^h}, as coefficients over the basis 1, ω, …, ω^{h−1}.
#[derive(Debug, Clone)]
pub struct UnramifiedElement {
    ctx: Arc<UnramifiedContext>,
    coeffs: Vec<PadicNumber>,
}

// raw coefficient-vector arithmetic, usable before the context is assembled
fn raw_add(p: u64, a: &[PadicNumber], b: &[PadicNumber]) -> Vec<PadicNumber> {
    debug_assert_eq!(a.len(), b.len());
    let _ = p;
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn raw_neg(a: &[PadicNumber]) -> Vec<PadicNumber> {
    a.iter().map(|x| x.neg()).collect()
}

fn raw_mul(p: u64, modulus: &[u64], a: &[PadicNumber], b: &[PadicNumber]) -> Vec<PadicNumber> {
    let h = modulus.len() - 1;
    let mut prod: Vec<PadicNumber> = vec![PadicNumber::zero(p); 2 * h - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let term = x.mul(y);
            prod[i + j] = prod[i + j].add(&term);
        }
    }
    // reduce by the monic modulus: ω^h = −(m_0 + m_1 ω + ⋯ + m_{h−1} ω^{h−1})
    for deg in (h..prod.len()).rev() {
        let lead = prod[deg].clone();
        if lead.is_exact_zero() {
            continue;
        }
        prod[deg] = PadicNumber::zero(p);
        for (j, &mj) in modulus.iter().take(h).enumerate() {
            if mj == 0 {
                continue;
            }
            let sub = lead.mul(&PadicNumber::from_integer(p, mj as i64));
            prod[deg - h + j] = prod[deg - h + j].sub(&sub);
        }
    }
    prod.truncate(h);
    prod
}

fn raw_pow(p: u64, modulus: &[u64], a: &[PadicNumber], mut e: u64) -> Vec<PadicNumber> {
    let h = modulus.len() - 1;
    let mut acc: Vec<PadicNumber> = vec![PadicNumber::zero(p); h];
    acc[0] = PadicNumber::from_integer(p, 1);
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = raw_mul(p, modulus, &acc, &base);
        }
        base = raw_mul(p, modulus, &base, &base);
        e >>= 1;
    }
    acc
}

/// Evaluates an integer polynomial at a coefficient vector.
fn raw_eval_int_poly(
    p: u64,
    modulus: &[u64],
    poly: &[i64],
    x: &[PadicNumber],
) -> Vec<PadicNumber> {
    let h = modulus.len() - 1;
    let mut acc: Vec<PadicNumber> = vec![PadicNumber::zero(p); h];
    for &c in poly.iter().rev() {
        acc = raw_mul(p, modulus, &acc, x);
        acc[0] = acc[0].add(&PadicNumber::from_integer(p, c));
    }
    acc
}

fn raw_inv(
    p: u64,
    modulus: &[u64],
    prec: u32,
    a: &[PadicNumber],
) -> Result<Vec<PadicNumber>, PadicError> {
    // solve (mult-by-a) x = 1 over Q_p
    let h = modulus.len() - 1;
    let mut cols = Vec::with_capacity(h);
    for j in 0..h {
        let mut basis = vec![PadicNumber::zero(p); h];
        basis[j] = PadicNumber::from_integer(p, 1);
        cols.push(raw_mul(p, modulus, a, &basis));
    }
    let mat: Vec<Vec<PadicNumber>> = (0..h)
        .map(|i| (0..h).map(|j| cols[j][i].clone()).collect())
        .collect();
    let mut rhs = vec![PadicNumber::zero(p); h];
    rhs[0] = PadicNumber::from_integer(p, 1);
    gauss_solve(mat, rhs, prec)
}

impl UnramifiedContext {
    /// The degree-h unramified extension at the given working precision.
    pub fn new(p: u64, h: u32, prec: u32) -> Arc<Self> {
        assert!(h >= 1 && prec >= 1);
        let modulus = find_modulus(p, h);
        let residue_field = FqContext::new(p, h);
        let frob_pows = if h == 1 {
            vec![
                vec![PadicNumber::from_integer(p, 1)],
                vec![PadicNumber::from_integer(p, 1)],
            ]
        } else {
            let sigma_omega = hensel_frobenius(p, &modulus, prec);
            let hh = h as usize;
            let mut pows: Vec<Vec<PadicNumber>> = Vec::with_capacity(hh + 1);
            let mut acc = vec![PadicNumber::zero(p); hh];
            acc[0] = PadicNumber::from_integer(p, 1);
            pows.push(acc.clone());
            for _ in 0..hh {
                acc = raw_mul(p, &modulus, &acc, &sigma_omega);
                pows.push(acc.clone());
            }
            pows
        };
        Arc::new(UnramifiedContext {
            p,
            h,
            prec,
            modulus,
            residue_field,
            frob_pows,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.h
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn residue_field(&self) -> &FqContext {
        &self.residue_field
    }

    /// Same extension: same prime, degree and modulus (precision may differ).
    pub fn compatible(&self, other: &Self) -> bool {
        self.p == other.p && self.h == other.h && self.modulus == other.modulus
    }

    pub fn elem(self: &Arc<Self>, coeffs: Vec<PadicNumber>) -> UnramifiedElement {
        assert_eq!(coeffs.len(), self.h as usize, "coefficient count");
        for c in &coeffs {
            assert_eq!(c.p(), self.p, "mixed primes");
        }
        UnramifiedElement {
            ctx: Arc::clone(self),
            coeffs,
        }
    }

    pub fn zero(self: &Arc<Self>) -> UnramifiedElement {
        self.elem(vec![PadicNumber::zero(self.p); self.h as usize])
    }

    pub fn one(self: &Arc<Self>) -> UnramifiedElement {
        self.from_integer(1)
    }

    pub fn from_integer(self: &Arc<Self>, n: i64) -> UnramifiedElement {
        let mut coeffs = vec![PadicNumber::zero(self.p); self.h as usize];
        coeffs[0] = PadicNumber::from_integer(self.p, n);
        self.elem(coeffs)
    }

    pub fn from_scalar(self: &Arc<Self>, s: PadicNumber) -> UnramifiedElement {
        assert_eq!(s.p(), self.p);
        let mut coeffs = vec![PadicNumber::zero(self.p); self.h as usize];
        coeffs[0] = s;
        self.elem(coeffs)
    }

    /// p^k as an element.
    pub fn p_power(self: &Arc<Self>, k: i64) -> UnramifiedElement {
        self.from_scalar(PadicNumber::p_power(self.p, k))
    }

    /// The class ω of x.
    pub fn gen(self: &Arc<Self>) -> UnramifiedElement {
        if self.h == 1 {
            return self.zero();
        }
        let mut coeffs = vec![PadicNumber::zero(self.p); self.h as usize];
        coeffs[1] = PadicNumber::from_integer(self.p, 1);
        self.elem(coeffs)
    }

    /// The Teichmüller lift: reduces to the input mod p and satisfies
    /// x^(p^h) = x to working precision. `teichmuller(0) = 0`.
    pub fn teichmuller(self: &Arc<Self>, residue: &FqElement) -> UnramifiedElement {
        assert_eq!(residue.coeffs.len(), self.h as usize);
        if residue.is_zero() {
            return self.zero();
        }
        let q: u64 = self.p.pow(self.h);
        let mut x: Vec<PadicNumber> = residue
            .coeffs
            .iter()
            .map(|&c| PadicNumber::from_integer(self.p, c as i64).with_precision(self.prec))
            .collect();
        for _ in 0..=self.prec {
            let next = raw_pow(self.p, &self.modulus, &x, q);
            let stable = next
                .iter()
                .zip(&x)
                .all(|(a, b)| a.eq_to_prec(b));
            x = next;
            if stable {
                break;
            }
        }
        self.elem(x)
    }

    /// A random element with unit coefficients at working precision.
    pub fn random(self: &Arc<Self>, rng: &mut impl Rng) -> UnramifiedElement {
        let coeffs = (0..self.h as usize)
            .map(|_| {
                let kind: u8 = rng.random_range(0..8);
                if kind == 0 {
                    return PadicNumber::zero(self.p);
                }
                let val: i64 = rng.random_range(-2..3);
                let mut unit = BigInt::zero();
                for _ in 0..self.prec {
                    unit = unit * BigInt::from(self.p)
                        + BigInt::from(rng.random_range(0..self.p));
                }
                if (unit.clone() % BigInt::from(self.p)).is_zero() {
                    unit += BigInt::one();
                }
                PadicNumber {
                    p: self.p,
                    repr: Repr::Unit {
                        val,
                        unit,
                        prec: self.prec,
                    },
                }
            })
            .collect();
        self.elem(coeffs)
    }
}

/// Hensel-lifts the root ω^p of the modulus: Newton iteration for g(x) = 0
/// starting from x = ω^p, inside Z_p[ω]/(g).
fn hensel_frobenius(p: u64, modulus: &[u64], prec: u32) -> Vec<PadicNumber> {
    let h = modulus.len() - 1;
    let g: Vec<i64> = modulus.iter().map(|&c| c as i64).collect();
    let dg: Vec<i64> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as i64)
        .collect();
    let mut omega = vec![PadicNumber::zero(p); h];
    omega[1] = PadicNumber::from_integer(p, 1).with_precision(prec + 2);
    let mut x = raw_pow(p, modulus, &omega, p);
    let max_iter = 64 + 2 * (32 - (prec.leading_zeros().min(31)));
    for _ in 0..max_iter {
        let gx = raw_eval_int_poly(p, modulus, &g, &x);
        if gx.iter().all(|c| c.is_zero_to_prec()) {
            return x;
        }
        let gpx = raw_eval_int_poly(p, modulus, &dg, &x);
        let gpx_inv = raw_inv(p, modulus, prec + 2, &gpx)
            .expect("modulus is separable mod p, so g'(x) is a unit");
        let delta = raw_mul(p, modulus, &gx, &gpx_inv);
        x = raw_add(p, &x, &raw_neg(&delta));
    }
    panic!("Hensel iteration for the Frobenius did not converge");
}

impl UnramifiedElement {
    pub fn ctx(&self) -> &Arc<UnramifiedContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    fn check_ctx(&self, other: &Self) {
        assert!(
            self.ctx.compatible(&other.ctx),
            "elements from incompatible extensions"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ctx(other);
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: raw_add(self.ctx.p, &self.coeffs, &other.coeffs),
        }
    }

    pub fn neg(&self) -> Self {
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: raw_neg(&self.coeffs),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ctx(other);
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: raw_mul(self.ctx.p, &self.ctx.modulus, &self.coeffs, &other.coeffs),
        }
    }

    pub fn mul_scalar(&self, s: &PadicNumber) -> Self {
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: raw_pow(self.ctx.p, &self.ctx.modulus, &self.coeffs, e),
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        let coeffs = raw_inv(self.ctx.p, &self.ctx.modulus, self.ctx.prec, &self.coeffs)?;
        Ok(UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs,
        })
    }

    /// The Frobenius σ: a ↦ the ring automorphism with σ(a) ≡ a^p (mod p).
    pub fn frobenius(&self) -> Self {
        let p = self.ctx.p;
        let h = self.ctx.h as usize;
        let mut out = vec![PadicNumber::zero(p); h];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for (j, base) in self.ctx.frob_pows[i].iter().enumerate() {
                out[j] = out[j].add(&c.mul(base));
            }
        }
        UnramifiedElement {
            ctx: Arc::clone(&self.ctx),
            coeffs: out,
        }
    }

    pub fn frobenius_iter(&self, k: u32) -> Self {
        let mut x = self.clone();
        for _ in 0..(k % self.ctx.h) {
            x = x.frobenius();
        }
        x
    }

    /// min of the coefficient valuations (the extension is unramified, so the
    /// ω-basis is integral and this is the element's valuation).
    pub fn valuation(&self) -> Valuation {
        let mut exact_min: Option<i64> = None;
        let mut bound_min: Option<i64> = None;
        for c in &self.coeffs {
            match c.valuation() {
                Valuation::Exact(v) => {
                    exact_min = Some(exact_min.map_or(v, |m| m.min(v)));
                }
                Valuation::AtLeast(v) => {
                    bound_min = Some(bound_min.map_or(v, |m| m.min(v)));
                }
                Valuation::Infinite => {}
            }
        }
        match (exact_min, bound_min) {
            (Some(e), Some(b)) if b < e => Valuation::AtLeast(b),
            (Some(e), _) => Valuation::Exact(e),
            (None, Some(b)) => Valuation::AtLeast(b),
            (None, None) => Valuation::Infinite,
        }
    }

    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_to_prec())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.sub(other).is_zero_to_prec()
    }

    /// Reduction mod p into the residue field; `None` if some coefficient has
    /// negative or unknown valuation sign.
    pub fn reduce_mod_p(&self) -> Option<FqElement> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.reduce_mod_p())
            .collect::<Option<Vec<u64>>>()?;
        Some(self.ctx.residue_field.elem(&coeffs))
    }
}

impl fmt::Display for UnramifiedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Linear algebra over Q_p at finite precision
// ---------------------------------------------------------------------------

/// Gauss–Jordan solve with minimal-valuation pivoting. Exact entries are
/// materialized at `work_prec` when inverted.
pub(crate) fn gauss_solve(
    mut a: Vec<Vec<PadicNumber>>,
    mut b: Vec<PadicNumber>,
    work_prec: u32,
) -> Result<Vec<PadicNumber>, PadicError> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    for col in 0..n {
        let mut pivot: Option<(usize, i64)> = None;
        for (r, row) in a.iter().enumerate().take(n).skip(col) {
            if let Valuation::Exact(v) = row[col].valuation() {
                if pivot.is_none_or(|(_, pv)| v < pv) {
                    pivot = Some((r, v));
                }
            }
        }
        let Some((pr, _)) = pivot else {
            return Err(PadicError::PrecisionExhausted(format!(
                "no usable pivot in column {col}"
            )));
        };
        a.swap(col, pr);
        b.swap(col, pr);
        let inv = a[col][col].inv_with(work_prec)?;
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].mul(&inv);
            if factor.is_zero_to_prec() && a[r][col].is_zero_to_prec() {
                continue;
            }
            for c in col..n {
                let sub = factor.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&sub);
            }
            let sub = factor.mul(&b[col]);
            b[r] = b[r].sub(&sub);
        }
    }
    (0..n)
        .map(|i| {
            let inv = a[i][i].inv_with(work_prec)?;
            Ok(b[i].mul(&inv))
        })
        .collect()
}

/// Dimension of the kernel, to working precision: columns without a usable
/// (exactly valued) pivot after elimination are counted as free.
pub(crate) fn gauss_nullity(
    mut a: Vec<Vec<PadicNumber>>,
    cols: usize,
    work_prec: u32,
) -> Result<usize, PadicError> {
    let rows = a.len();
    let mut rank = 0usize;
    let mut next_row = 0usize;
    for col in 0..cols {
        let mut pivot: Option<(usize, i64)> = None;
        for (r, row) in a.iter().enumerate().take(rows).skip(next_row) {
            if let Valuation::Exact(v) = row[col].valuation() {
                if pivot.is_none_or(|(_, pv)| v < pv) {
                    pivot = Some((r, v));
                }
            }
        }
        let Some((pr, _)) = pivot else {
            continue;
        };
        a.swap(next_row, pr);
        let inv = a[next_row][col].inv_with(work_prec)?;
        for r in 0..rows {
            if r == next_row {
                continue;
            }
            let factor = a[r][col].mul(&inv);
            if a[r][col].is_zero_to_prec() {
                continue;
            }
            for c in col..cols {
                let sub = factor.mul(&a[next_row][c]);
                a[r][c] = a[r][c].sub(&sub);
            }
        }
        rank += 1;
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    Ok(cols - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integer_addition_carries_into_valuation() {
        let a = PadicNumber::from_integer(7, 3);
        let b = PadicNumber::from_integer(7, 4);
        let s = a.add(&b);
        assert_eq!(s.valuation(), Valuation::Exact(1));
        assert_eq!(s, PadicNumber::p_power(7, 1));
    }

    #[test]
    fn inverse_of_p() {
        let p = PadicNumber::p_power(7, 1);
        let inv = p.inv().unwrap();
        assert_eq!(inv.valuation(), Valuation::Exact(-1));
        assert!(inv.mul(&p).eq_to_prec(&PadicNumber::from_integer(7, 1)));
    }

    #[test]
    fn cancellation_yields_big_o() {
        let a = PadicNumber::from_integer(5, 7).with_precision(6);
        let diff = a.sub(&a);
        assert!(diff.is_zero_to_prec());
        assert_eq!(diff.valuation(), Valuation::AtLeast(6));
    }

    #[test]
    fn precision_propagation_add() {
        // 5^0*2 + O(5^3) plus 5^2*1 exact: result known mod 5^3 only
        let a = PadicNumber::from_integer(5, 2).with_precision(3);
        let b = PadicNumber::p_power(5, 2);
        let s = a.add(&b);
        assert_eq!(s.valuation(), Valuation::Exact(0));
        assert_eq!(s.precision(), 3);
    }

    #[test]
    fn rational_materialization() {
        let half = PadicNumber::from_ratio(7, &rat(1, 2), 8);
        let two = PadicNumber::from_integer(7, 2);
        assert!(half.mul(&two).eq_to_prec(&PadicNumber::from_integer(7, 1)));
        // denominators that are p powers stay exact
        let x = PadicNumber::from_ratio(7, &rat(3, 49), 8);
        assert_eq!(x.valuation(), Valuation::Exact(-2));
        assert_eq!(x.precision(), EXACT);
    }

    #[test]
    fn omega_squared_in_q4() {
        // p=2, h=2, modulus x^2+x+1: ω·ω = −ω−1
        let ctx = UnramifiedContext::new(2, 2, 16);
        let w = ctx.gen();
        let w2 = w.mul(&w);
        let minus_one = ctx.from_integer(-1);
        let expect = ctx.gen().neg().add(&minus_one);
        assert!(w2.eq_to_prec(&expect));
    }

    #[test]
    fn frobenius_fixes_prime_field() {
        let ctx = UnramifiedContext::new(7, 1, 16);
        let a = ctx.from_integer(23);
        assert!(a.frobenius().eq_to_prec(&a));
    }

    #[test]
    fn frobenius_on_teichmuller_is_residue_frobenius() {
        let ctx = UnramifiedContext::new(3, 2, 16);
        let fq = ctx.residue_field().clone();
        let g = fq.gen();
        let t = ctx.teichmuller(&g);
        let expect = ctx.teichmuller(&fq.frobenius(&g));
        assert!(t.frobenius().eq_to_prec(&expect));
    }

    #[test]
    fn frobenius_power_h_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, h) in [(2u64, 2u32), (5, 3), (7, 2)] {
            let ctx = UnramifiedContext::new(p, h, 16);
            for _ in 0..20 {
                let a = ctx.random(&mut rng);
                assert!(a.frobenius_iter(h).eq_to_prec(&a), "σ^h ≠ id at p={p} h={h}");
            }
        }
    }

    #[test]
    fn frobenius_is_ring_morphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ctx = UnramifiedContext::new(5, 4, 16);
        for _ in 0..10 {
            let a = ctx.random(&mut rng);
            let b = ctx.random(&mut rng);
            assert!(a
                .mul(&b)
                .frobenius()
                .eq_to_prec(&a.frobenius().mul(&b.frobenius())));
            assert!(a
                .add(&b)
                .frobenius()
                .eq_to_prec(&a.frobenius().add(&b.frobenius())));
        }
    }

    #[test]
    fn teichmuller_examples() {
        let ctx = UnramifiedContext::new(7, 1, 8);
        let fq = ctx.residue_field().clone();
        assert!(ctx
            .teichmuller(&fq.from_u64(1))
            .eq_to_prec(&ctx.one()));
        assert!(ctx.teichmuller(&fq.from_u64(0)).is_zero_to_prec());

        // independent oracle: iterate x ↦ x^7 mod 7^8 from 2 to its fixed point
        let m: u64 = 7u64.pow(8);
        let mut x: u64 = 2;
        loop {
            let mut acc: u64 = 1;
            for _ in 0..7 {
                acc = ((acc as u128 * x as u128) % m as u128) as u64;
            }
            if acc == x {
                break;
            }
            x = acc;
        }
        let t = ctx.teichmuller(&fq.from_u64(2));
        let expect = ctx.from_integer(x as i64).with_elem_precision(8);
        assert!(t.with_elem_precision(8).eq_to_prec(&expect));
    }

    #[test]
    fn teichmuller_is_multiplicative_root_of_unity() {
        let ctx = UnramifiedContext::new(5, 2, 12);
        let fq = ctx.residue_field().clone();
        let g = fq.gen();
        let t = ctx.teichmuller(&g);
        // x^(q-1) = 1 at precision
        assert!(t.pow(24).eq_to_prec(&ctx.one()));
        assert_eq!(t.reduce_mod_p().unwrap(), g);
    }

    #[test]
    fn element_inverse() {
        let ctx = UnramifiedContext::new(7, 3, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = ctx.random(&mut rng);
            if a.is_zero_to_prec() {
                continue;
            }
            let inv = a.inv().unwrap();
            assert!(a.mul(&inv).eq_to_prec(&ctx.one()));
        }
    }

    #[test]
    fn valuation_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ctx = UnramifiedContext::new(3, 2, 16);
        for _ in 0..30 {
            let a = ctx.random(&mut rng);
            let b = ctx.random(&mut rng);
            if let (Valuation::Exact(va), Valuation::Exact(vb)) = (a.valuation(), b.valuation()) {
                if let Valuation::Exact(vab) = a.mul(&b).valuation() {
                    assert_eq!(vab, va + vb);
                }
                match a.add(&b).valuation() {
                    Valuation::Exact(v) => {
                        assert!(v >= va.min(vb));
                        if va != vb {
                            assert_eq!(v, va.min(vb));
                        }
                    }
                    Valuation::AtLeast(v) => assert!(v >= va.min(vb)),
                    Valuation::Infinite => {}
                }
            }
        }
    }

    #[test]
    fn scalar_json_round_trip() {
        let x = PadicNumber::p_power(7, -1).with_precision(32);
        let json = serde_json::to_value(&x).unwrap();
        assert_eq!(json["p"], 7);
        assert_eq!(json["val"], -1);
        assert_eq!(json["prec"], 32);
        assert_eq!(json["unit_digits"][0], 1);
        let back: PadicNumber = serde_json::from_value(json).unwrap();
        assert!(back.eq_to_prec(&x));

        let z = PadicNumber::zero(7);
        let back: PadicNumber = serde_json::from_value(serde_json::to_value(&z).unwrap()).unwrap();
        assert!(back.is_exact_zero());
    }

    impl UnramifiedElement {
        fn with_elem_precision(&self, prec: u32) -> Self {
            UnramifiedElement {
                ctx: Arc::clone(&self.ctx),
                coeffs: self.coeffs.iter().map(|c| c.with_precision(prec)).collect(),
            }
        }
    }
}
