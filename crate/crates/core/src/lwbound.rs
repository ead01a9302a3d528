//! Exact evaluation of the point-count bound and of the threshold it implies.
//!
//! Half-integral powers of `q = 2^m` are carried as `a + b sqrt(2)` with integer
//! `a, b`, so every sign decision is exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("degree {0} is not a perfect cube, so delta^(13/3) is irrational")]
    NonCubeDegree(u64),
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u128),
    #[error("m = {0} is outside 1..=64")]
    DegreeOutOfRange(u32),
    #[error("constant ledger mismatch: {0}")]
    Ledger(String),
    #[error("the bound turns negative again at m = {0}")]
    NotPersistent(u32),
    #[error("no odd m up to 64 makes the bound positive")]
    NoThreshold,
}

/// The constants of the bound with their defining products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    pub r: u64,
    pub delta: u64,
    /// `(delta - 1)(delta - 2)`.
    pub lw_c1: u64,
    /// `5 delta^(13/3)`.
    pub lw_c2: u64,
    /// Degree of the intersection curve (24 * 12).
    pub curve_cap: u64,
    /// Multiplier of `q (q - 1)` in the count of excluded quadruples.
    pub line_cap: u64,
    pub combined_cap: u64,
}

pub const PARAMS: BoundParams =
    BoundParams { r: 3, delta: 27, lw_c1: 650, lw_c2: 7_971_615, curve_cap: 288, line_cap: 24, combined_cap: 312 };

impl BoundParams {
    /// Recomputes each constant from its definition.
    pub fn check(&self) -> Result<(), BoundError> {
        let fail = |what: &str| Err(BoundError::Ledger(what.to_string()));
        if self.lw_c1 != (self.delta - 1) * (self.delta - 2) || self.lw_c1 != 25 * 26 {
            return fail("lw_c1 != (delta-1)(delta-2) = 25*26");
        }
        let k = integer_cube_root(self.delta).ok_or(BoundError::NonCubeDegree(self.delta))?;
        if self.lw_c2 != 5 * k.pow(13) || self.lw_c2 != 5 * 1_594_323 {
            return fail("lw_c2 != 5 * delta^(13/3) = 5 * 3^13");
        }
        if self.curve_cap != 24 * 12 {
            return fail("curve_cap != 24 * 12");
        }
        if self.combined_cap != self.curve_cap + self.line_cap {
            return fail("combined_cap != curve_cap + line_cap");
        }
        Ok(())
    }
}

fn integer_cube_root(n: u64) -> Option<u64> {
    let k = (n as f64).cbrt().round() as u64;
    (k.saturating_sub(1)..=k + 1).find(|&c| c.checked_pow(3) == Some(n))
}

/// A number `a + b sqrt(2)` with integer `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd2 {
    pub a: BigInt,
    pub b: BigInt,
}

impl Surd2 {
    pub fn int(a: impl Into<BigInt>) -> Surd2 {
        Surd2 { a: a.into(), b: BigInt::zero() }
    }

    /// `2^(k/2)`.
    pub fn pow2_half(k: u64) -> Surd2 {
        let whole = BigInt::one() << (k / 2);
        if k.is_multiple_of(2) {
            Surd2 { a: whole, b: BigInt::zero() }
        } else {
            Surd2 { a: BigInt::zero(), b: whole }
        }
    }

    pub fn signum(&self) -> Ordering {
        let (sa, sb) = (self.a.sign(), self.b.sign());
        let pos = |s: BigSign| s == BigSign::Plus;
        let neg = |s: BigSign| s == BigSign::Minus;
        if (pos(sa) || sa == BigSign::NoSign) && (pos(sb) || sb == BigSign::NoSign) {
            return if sa == BigSign::NoSign && sb == BigSign::NoSign { Ordering::Equal } else { Ordering::Greater };
        }
        if (neg(sa) || sa == BigSign::NoSign) && (neg(sb) || sb == BigSign::NoSign) {
            return Ordering::Less;
        }
        // opposite signs: compare a^2 with 2 b^2
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b * 2;
        match a2.cmp(&b2) {
            Ordering::Greater => if pos(sa) { Ordering::Greater } else { Ordering::Less },
            Ordering::Less => if pos(sb) { Ordering::Greater } else { Ordering::Less },
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
}

impl Add for Surd2 {
    type Output = Surd2;
    fn add(self, o: Surd2) -> Surd2 {
        Surd2 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for Surd2 {
    type Output = Surd2;
    fn sub(self, o: Surd2) -> Surd2 {
        Surd2 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Neg for Surd2 {
    type Output = Surd2;
    fn neg(self) -> Surd2 {
        Surd2 { a: -self.a, b: -self.b }
    }
}

impl Mul<&BigInt> for Surd2 {
    type Output = Surd2;
    fn mul(self, k: &BigInt) -> Surd2 {
        Surd2 { a: self.a * k, b: self.b * k }
    }
}

impl PartialOrd for Surd2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl fmt::Display for Surd2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt(2)", self.b)
        } else {
            write!(f, "{} {} {}*sqrt(2)", self.a, if self.b.is_negative() { "-" } else { "+" }, self.b.abs())
        }
    }
}

impl Serialize for Surd2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn log2_exact(q: u128) -> Result<u64, BoundError> {
    if q == 0 || !q.is_power_of_two() {
        Err(BoundError::NotPowerOfTwo(q))
    } else {
        Ok(q.trailing_zeros() as u64)
    }
}

/// `q > 2 (r + 1) delta^2`.
pub fn lw_applicable(r: u64, delta: u64, q: u128) -> bool {
    q > 2 * (r as u128 + 1) * (delta as u128) * (delta as u128)
}

/// The interval `q^r -+ ((delta-1)(delta-2) q^(r-1/2) + 5 delta^(13/3) q^(r-1))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LwInterval {
    pub lower: Surd2,
    pub upper: Surd2,
    /// Whether the size condition on `q` holds; the interval is computed either way.
    pub applicable: bool,
}

pub fn lw_interval(r: u64, delta: u64, q: u128) -> Result<LwInterval, BoundError> {
    let m = log2_exact(q)?;
    let k = integer_cube_root(delta).ok_or(BoundError::NonCubeDegree(delta))?;
    let qr = Surd2::int(BigInt::one() << (m * r));
    let c1 = BigInt::from((delta - 1) * (delta - 2));
    let c2 = BigInt::from(5u8) * BigInt::from(k).pow(13);
    let half = Surd2::pow2_half(m * (2 * r - 1)) * &c1;
    let err = half + Surd2::int(c2 << (m * (r - 1)));
    Ok(LwInterval { lower: qr.clone() - err.clone(), upper: qr + err, applicable: lw_applicable(r, delta, q) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSign {
    Negative,
    Zero,
    Positive,
}

/// `q^3 - 650 q^(5/2) - 7971615 q^2 - 312 q (q - 1)` at `q = 2^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub m: u32,
    #[serde(serialize_with = "as_string")]
    pub q: BigUint,
    pub sign: BoundSign,
    pub float_estimate: f64,
    pub applicable: bool,
    /// `q^3`, `650^2 q^5` (the square of the half-power term), `7971615 q^2`, `312 q (q - 1)`.
    #[serde(serialize_with = "terms_as_strings")]
    pub terms: [BigInt; 4],
    /// The exact value as `a + b sqrt(2)`.
    pub value: Surd2,
    pub note: Option<String>,
}

fn as_string<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn terms_as_strings<S: Serializer>(v: &[BigInt; 4], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|t| t.to_string()))
}

pub fn theta_lower_bound(m: u32) -> Result<BoundReport, BoundError> {
    if !(1..=64).contains(&m) {
        return Err(BoundError::DegreeOutOfRange(m));
    }
    let p = PARAMS;
    p.check()?;
    let q: BigInt = BigInt::one() << m;
    let q3 = q.pow(3);
    let t2 = BigInt::from(p.lw_c2) * q.pow(2);
    let t3 = BigInt::from(p.combined_cap) * &q * (&q - BigInt::one());
    let half_sq = BigInt::from(p.lw_c1).pow(2) * q.pow(5);
    let t = &q3 - &t2 - &t3;
    let sign = if t.sign() != BigSign::Plus {
        BoundSign::Negative
    } else {
        match (&t * &t).cmp(&half_sq) {
            Ordering::Greater => BoundSign::Positive,
            Ordering::Equal => BoundSign::Zero,
            Ordering::Less => BoundSign::Negative,
        }
    };
    let value = Surd2::int(t.clone()) - Surd2::pow2_half(5 * m as u64) * &BigInt::from(p.lw_c1);
    debug_assert_eq!(
        value.signum(),
        match sign {
            BoundSign::Negative => Ordering::Less,
            BoundSign::Zero => Ordering::Equal,
            BoundSign::Positive => Ordering::Greater,
        }
    );
    let qf = 2f64.powi(m as i32);
    let float_estimate = qf.powi(3) - p.lw_c1 as f64 * qf.powf(2.5) - p.lw_c2 as f64 * qf * qf - p.combined_cap as f64 * qf * (qf - 1.0);
    let note = m.is_multiple_of(2).then(|| "excluded by parity argument".to_string());
    Ok(BoundReport {
        m,
        q: q.to_biguint().expect("positive"),
        sign,
        float_estimate,
        applicable: lw_applicable(p.r, p.delta, 1u128 << m),
        terms: [q3, half_sq, t2, t3],
        value,
        note,
    })
}

/// Smallest odd `m` with a positive bound, after checking that positivity holds for all larger `m <= 64`.
pub fn find_min_odd_m() -> Result<u32, BoundError> {
    let reports = (1..=64).map(theta_lower_bound).collect::<Result<Vec<_>, _>>()?;
    let min = reports.iter().find(|r| r.m % 2 == 1 && r.sign == BoundSign::Positive).ok_or(BoundError::NoThreshold)?.m;
    if let Some(r) = reports.iter().find(|r| r.m > min && r.sign != BoundSign::Positive) {
        return Err(BoundError::NotPersistent(r.m));
    }
    Ok(min)
}

/// Smallest `m` with `lw_applicable(r, delta, 2^m)`.
pub fn first_applicable_m(r: u64, delta: u64) -> Option<u32> {
    (1..=64).find(|&m| lw_applicable(r, delta, 1u128 << m))
}
