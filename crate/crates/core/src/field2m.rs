//! Arithmetic in the binary fields GF(2^m).
//!
//! Elements use a polynomial basis: bit `i` of an element is the coefficient of
//! `t^i`, and products are reduced modulo an irreducible polynomial of degree `m`.
//! Small fields (m <= 16) carry log/antilog tables; larger ones fall back to a
//! carry-less multiply followed by reduction.
//!
//! [`FieldSpec`] is a cheap, clonable handle. Hot loops work on the raw `u64`
//! encodings through the `FieldSpec` methods; [`Fe`] pairs a value with its field
//! and rejects mixed-field arithmetic.

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Smallest extension degree accepted by [`make_field`].
pub const MIN_DEGREE: u32 = 2;
/// Largest extension degree accepted by [`make_field`].
pub const MAX_DEGREE: u32 = 32;
/// Largest extension degree for the auxiliary fields used by randomized probes.
pub const MAX_PROBE_DEGREE: u32 = 64;

const TABLE_DEGREE_LIMIT: u32 = 16;

static MODULUS_TABLE_TEXT: &str = include_str!("../data/moduli.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("unsupported extension degree {0}")]
    UnsupportedDegree(u32),
    #[error("modulus {modulus:#x} is reducible over GF(2)")]
    ReducibleModulus { modulus: u128 },
    #[error("modulus {modulus:#x} does not have degree {m}")]
    DegreeMismatch { m: u32, modulus: u128 },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("value {bits:#x} is not an element of GF(2^{m})")]
    OutOfRange { bits: u64, m: u32 },
    #[error("modulus table line {line}: {reason}")]
    Table { line: usize, reason: String },
}

// ---------------------------------------------------------------------------
// GF(2)[t] helpers on u128 bit-vectors.

fn poly_degree(p: u128) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(127 - p.leading_zeros())
    }
}

fn poly_rem(mut a: u128, f: u128) -> u128 {
    let df = poly_degree(f).expect("nonzero modulus");
    while let Some(da) = poly_degree(a) {
        if da < df {
            break;
        }
        a ^= f << (da - df);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Carry-less product of two polynomials of degree < 64.
#[inline]
pub(crate) fn clmul(a: u64, b: u64) -> u128 {
    let a = a as u128;
    let mut b = b;
    let mut acc = 0u128;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= a << i;
        b &= b - 1;
    }
    acc
}

fn poly_mulmod(a: u128, b: u128, f: u128) -> u128 {
    poly_rem(clmul(a as u64, b as u64), f)
}

/// Irreducibility over GF(2) of a polynomial of degree 1..=64.
///
/// `f` is irreducible iff `gcd(t^(2^i) + t mod f, f) = 1` for every `1 <= i <= deg/2`.
pub fn is_irreducible(poly: u128) -> bool {
    let n = match poly_degree(poly) {
        None | Some(0) => return false,
        Some(n) => n,
    };
    assert!(n <= MAX_PROBE_DEGREE, "degree {n} exceeds the supported range");
    if n == 1 {
        return true;
    }
    let t = poly_rem(0b10, poly);
    let mut frob = t;
    for _ in 1..=n / 2 {
        frob = poly_mulmod(frob, frob, poly);
        if poly_gcd(poly, frob ^ t) != 1 {
            return false;
        }
    }
    true
}

/// Distinct prime factors of `n`, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Parses a modulus table: one `m <hex-modulus>` entry per line, `#` comments.
pub fn parse_modulus_table(text: &str) -> Result<Vec<(u32, u128)>, FieldError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| FieldError::Table { line: idx + 1, reason: reason.to_string() };
        let mut parts = line.split_whitespace();
        let m: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("expected degree"))?;
        let hex = parts.next().ok_or_else(|| bad("expected modulus"))?;
        let hex = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).ok_or_else(|| bad("modulus must be 0x-prefixed"))?;
        let modulus = u128::from_str_radix(hex, 16).map_err(|_| bad("invalid hex"))?;
        if parts.next().is_some() {
            return Err(bad("trailing tokens"));
        }
        if poly_degree(modulus) != Some(m) {
            return Err(FieldError::DegreeMismatch { m, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus { modulus });
        }
        out.push((m, modulus));
    }
    Ok(out)
}

fn shipped_table() -> &'static [(u32, u128)] {
    static TABLE: OnceLock<Vec<(u32, u128)>> = OnceLock::new();
    TABLE.get_or_init(|| parse_modulus_table(MODULUS_TABLE_TEXT).expect("shipped modulus table is valid"))
}

/// The shipped default modulus for degree `m`, if the table covers it.
pub fn default_modulus(m: u32) -> Option<u128> {
    shipped_table().iter().find(|(d, _)| *d == m).map(|(_, f)| *f)
}

// ---------------------------------------------------------------------------

struct Tables {
    log: Vec<u16>,
    exp: Vec<u16>,
}

struct Inner {
    m: u32,
    modulus: u128,
    mask: u64,
    tables: Option<Tables>,
    generator: OnceLock<u64>,
}

/// A binary field GF(2^m) fixed by its modulus.
#[derive(Clone)]
pub struct FieldSpec(Arc<Inner>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.0.m, self.0.modulus)
    }
}

/// Builds GF(2^m), 2 <= m <= 32, from `modulus` or the shipped default.
pub fn make_field(m: u32, modulus: Option<u128>) -> Result<FieldSpec, FieldError> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
        return Err(FieldError::UnsupportedDegree(m));
    }
    FieldSpec::build(m, modulus)
}

impl FieldSpec {
    /// Field for randomized probes; accepts degrees up to 64.
    pub fn probe_field(m: u32) -> Result<FieldSpec, FieldError> {
        if !(MIN_DEGREE..=MAX_PROBE_DEGREE).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        FieldSpec::build(m, None)
    }

    fn build(m: u32, modulus: Option<u128>) -> Result<FieldSpec, FieldError> {
        let modulus = match modulus {
            Some(f) => f,
            None => default_modulus(m).ok_or(FieldError::UnsupportedDegree(m))?,
        };
        if poly_degree(modulus) != Some(m) {
            return Err(FieldError::DegreeMismatch { m, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus { modulus });
        }
        let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let mut inner = Inner { m, modulus, mask, tables: None, generator: OnceLock::new() };
        if m <= TABLE_DEGREE_LIMIT {
            let probe = FieldSpec(Arc::new(Inner { m, modulus, mask, tables: None, generator: OnceLock::new() }));
            let g = probe.generator();
            let order = mask as usize;
            let mut log = vec![0u16; order + 1];
            let mut exp = vec![0u16; 2 * order];
            let mut x = 1u64;
            for (i, slot) in exp.iter_mut().take(order).enumerate() {
                *slot = x as u16;
                log[x as usize] = i as u16;
                x = probe.mul_slow(x, g);
            }
            for i in order..2 * order {
                exp[i] = exp[i - order];
            }
            inner.tables = Some(Tables { log, exp });
            inner.generator.set(g).ok();
        }
        Ok(FieldSpec(Arc::new(inner)))
    }

    pub fn m(&self) -> u32 {
        self.0.m
    }

    pub fn modulus(&self) -> u128 {
        self.0.modulus
    }

    /// Field size 2^m.
    pub fn q(&self) -> u128 {
        1u128 << self.0.m
    }

    /// Bit mask of valid encodings, equal to q - 1.
    pub fn mask(&self) -> u64 {
        self.0.mask
    }

    pub fn contains(&self, bits: u64) -> bool {
        bits & !self.0.mask == 0
    }

    pub fn element(&self, bits: u64) -> Result<Fe, FieldError> {
        if !self.contains(bits) {
            return Err(FieldError::OutOfRange { bits, m: self.0.m });
        }
        Ok(Fe { bits, field: self.clone() })
    }

    pub fn zero(&self) -> Fe {
        Fe { bits: 0, field: self.clone() }
    }

    pub fn one(&self) -> Fe {
        Fe { bits: 1, field: self.clone() }
    }

    /// All encodings `0..q` in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..=self.0.mask
    }

    #[inline]
    fn reduce(&self, mut x: u128) -> u64 {
        let m = self.0.m;
        while x >> m != 0 {
            let top = 127 - x.leading_zeros();
            x ^= self.0.modulus << (top - m);
        }
        x as u64
    }

    #[inline]
    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        self.reduce(clmul(a, b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match &self.0.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize] as u64
                }
            }
            None => self.mul_slow(a, b),
        }
    }

    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    /// `a^e` by square-and-multiply, with `0^0 = 1`.
    pub fn pow(&self, a: u64, e: u128) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if let Some(t) = &self.0.tables {
            let order = self.0.mask as u128;
            let k = (t.log[a as usize] as u128 * (e % order)) % order;
            return t.exp[k as usize] as u64;
        }
        let mut base = a;
        let mut e = e;
        let mut acc = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(t) = &self.0.tables {
            let order = self.0.mask as usize;
            let k = (order - t.log[a as usize] as usize) % order;
            return Ok(t.exp[k] as u64);
        }
        Ok(self.pow(a, self.q() - 2))
    }

    /// The unique square root `a^(2^(m-1))`.
    pub fn sqrt(&self, a: u64) -> u64 {
        let mut x = a;
        for _ in 1..self.0.m {
            x = self.square(x);
        }
        x
    }

    /// Absolute trace to GF(2).
    pub fn trace(&self, a: u64) -> u8 {
        let mut acc = 0u64;
        let mut x = a;
        for _ in 0..self.0.m {
            acc ^= x;
            x = self.square(x);
        }
        debug_assert!(acc <= 1);
        acc as u8
    }

    /// Smallest-encoding primitive element.
    pub fn generator(&self) -> u64 {
        *self.0.generator.get_or_init(|| {
            let order = self.0.mask;
            let primes = prime_factors(order);
            (1..=order)
                .find(|&a| primes.iter().all(|&p| self.pow(a, (order / p) as u128) != 1))
                .expect("multiplicative group is cyclic")
        })
    }

    /// Whether `u = w^7` for some `w` in the field.
    pub fn is_seventh_power(&self, u: u64) -> Result<bool, FieldError> {
        if u == 0 {
            return Err(FieldError::ZeroArgument);
        }
        let order = self.0.mask;
        if !order.is_multiple_of(7) {
            return Ok(true);
        }
        Ok(self.pow(u, (order / 7) as u128) == 1)
    }

    /// The smallest-encoding `w` with `w^7 = u`, or `None` when `u` is not a 7th power.
    pub fn seventh_root(&self, u: u64) -> Result<Option<u64>, FieldError> {
        if !self.is_seventh_power(u)? {
            return Ok(None);
        }
        let order = self.0.mask;
        if !order.is_multiple_of(7) {
            let e = mod_inverse(7, order).expect("7 is invertible modulo q-1");
            return Ok(Some(self.pow(u, e as u128)));
        }
        let reduced = order / 7;
        let root = match mod_inverse(7, reduced) {
            Some(e) => self.pow(u, e as u128),
            // 49 | q - 1 (m a multiple of 21): fall back to a scan.
            None => self
                .elements()
                .skip(1)
                .find(|&w| self.pow(w, 7) == u)
                .expect("u is a 7th power"),
        };
        debug_assert_eq!(self.pow(root, 7), u);
        let zeta = self.pow(self.generator(), reduced as u128);
        let mut best = root;
        let mut r = root;
        for _ in 1..7 {
            r = self.mul(r, zeta);
            best = best.min(r);
        }
        Ok(Some(best))
    }
}

fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (n as i128, (a % n) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    if t < 0 {
        t += n as i128;
    }
    Some(t as u64)
}

// ---------------------------------------------------------------------------

/// An element of a specific [`FieldSpec`].
#[derive(Clone, PartialEq, Eq)]
pub struct Fe {
    bits: u64,
    field: FieldSpec,
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

impl Fe {
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    fn same(&self, other: &Fe) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn with(&self, bits: u64) -> Fe {
        Fe { bits, field: self.field.clone() }
    }

    pub fn add(&self, other: &Fe) -> Result<Fe, FieldError> {
        self.same(other)?;
        Ok(self.with(self.bits ^ other.bits))
    }

    pub fn mul(&self, other: &Fe) -> Result<Fe, FieldError> {
        self.same(other)?;
        Ok(self.with(self.field.mul(self.bits, other.bits)))
    }

    pub fn square(&self) -> Fe {
        self.with(self.field.square(self.bits))
    }

    pub fn pow(&self, e: u128) -> Fe {
        self.with(self.field.pow(self.bits, e))
    }

    pub fn inv(&self) -> Result<Fe, FieldError> {
        Ok(self.with(self.field.inv(self.bits)?))
    }

    pub fn sqrt(&self) -> Fe {
        self.with(self.field.sqrt(self.bits))
    }

    pub fn trace(&self) -> u8 {
        self.field.trace(self.bits)
    }

    pub fn is_seventh_power(&self) -> Result<bool, FieldError> {
        self.field.is_seventh_power(self.bits)
    }
}
