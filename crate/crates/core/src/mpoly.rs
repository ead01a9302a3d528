//! Sparse polynomials over GF(2) in the fixed variables `al be ga X Y Z u`.
//!
//! A monomial is packed into a `u64` with nine bits per exponent and `al` in the
//! most significant slot, so integer order on the packed word is lexicographic
//! order with `al > be > ga > X > Y > Z > u`. A polynomial is the sorted set of
//! its monomials; every coefficient is 1.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::field2m::{FieldError, FieldSpec, Fe};
use crate::upoly;

pub const NVARS: usize = 7;
/// Exponents must stay strictly below this cap.
pub const EXPONENT_CAP: u32 = 512;

const SLOT_BITS: u32 = 9;
const SLOT_MASK: u64 = (1 << SLOT_BITS) - 1;
// bit just above each slot: a carry or borrow crossing a slot boundary lands here
const BOUNDARY_MASK: u64 = {
    let mut m = 0u64;
    let mut i = 1;
    while i <= NVARS as u32 {
        m |= 1 << (i * SLOT_BITS);
        i += 1;
    }
    m
};
const PAR_PRODUCT_CHUNK: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Al,
    Be,
    Ga,
    X,
    Y,
    Z,
    U,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::Al, Var::Be, Var::Ga, Var::X, Var::Y, Var::Z, Var::U];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["al", "be", "ga", "X", "Y", "Z", "u"][self.index()]
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }

    fn shift(self) -> u32 {
        (NVARS as u32 - 1 - self as u32) * SLOT_BITS
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MPolyError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("duplicate monomial {monomial} at line {line}, column {column}")]
    DuplicateMonomial { line: usize, column: usize, monomial: String },
    #[error("exponent of {var} exceeds the cap {EXPONENT_CAP}")]
    ExponentOverflow { var: Var },
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("clearing power {clear_power} is below the degree {degree} in {var}")]
    InsufficientClearing { var: Var, degree: u32, clear_power: u32 },
    #[error("variable {0} has no assigned value")]
    UnassignedVariable(Var),
    #[error("every specialization sent an input to zero")]
    DegenerateSpecialization,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A monomial with exponents below [`EXPONENT_CAP`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_exponents(exps: [u32; NVARS]) -> Result<Monomial, MPolyError> {
        let mut packed = 0u64;
        for v in Var::ALL {
            let e = exps[v.index()];
            if e >= EXPONENT_CAP {
                return Err(MPolyError::ExponentOverflow { var: v });
            }
            packed |= (e as u64) << v.shift();
        }
        Ok(Monomial(packed))
    }

    pub fn var(v: Var, e: u32) -> Result<Monomial, MPolyError> {
        let mut exps = [0; NVARS];
        exps[v.index()] = e;
        Monomial::from_exponents(exps)
    }

    pub fn exponents(self) -> [u32; NVARS] {
        let mut out = [0; NVARS];
        for v in Var::ALL {
            out[v.index()] = self.degree(v);
        }
        out
    }

    #[inline]
    pub fn degree(self, v: Var) -> u32 {
        ((self.0 >> v.shift()) & SLOT_MASK) as u32
    }

    pub fn degree_in(self, vars: &[Var]) -> u32 {
        vars.iter().map(|&v| self.degree(v)).sum()
    }

    pub fn total_degree(self) -> u32 {
        self.degree_in(&Var::ALL)
    }

    #[inline]
    fn without(self, v: Var) -> Monomial {
        Monomial(self.0 & !(SLOT_MASK << v.shift()))
    }

    #[inline]
    pub fn checked_mul(self, other: Monomial) -> Option<Monomial> {
        let sum = self.0 + other.0;
        if (self.0 ^ other.0 ^ sum) & BOUNDARY_MASK != 0 {
            None
        } else {
            Some(Monomial(sum))
        }
    }

    fn mul(self, other: Monomial) -> Result<Monomial, MPolyError> {
        self.checked_mul(other).ok_or_else(|| {
            let (a, b) = (self.exponents(), other.exponents());
            let var = Var::ALL
                .into_iter()
                .find(|v| a[v.index()] + b[v.index()] >= EXPONENT_CAP)
                .unwrap_or(Var::Al);
            MPolyError::ExponentOverflow { var }
        })
    }

    /// `self / other` when `other` divides `self`.
    #[inline]
    pub fn checked_div(self, other: Monomial) -> Option<Monomial> {
        if self.0 < other.0 {
            return None;
        }
        let diff = self.0 - other.0;
        if (self.0 ^ other.0 ^ diff) & BOUNDARY_MASK != 0 {
            None
        } else {
            Some(Monomial(diff))
        }
    }

    fn gcd(self, other: Monomial) -> Monomial {
        let mut exps = [0; NVARS];
        for v in Var::ALL {
            exps[v.index()] = self.degree(v).min(other.degree(v));
        }
        Monomial::from_exponents(exps).expect("gcd stays within cap")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::ONE {
            return f.write_str("1");
        }
        let mut first = true;
        for v in Var::ALL {
            let e = self.degree(v);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A polynomial over GF(2): a set of monomials.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MPoly {
    // strictly increasing
    terms: Vec<Monomial>,
}

/// Sorts and keeps the monomials that occur an odd number of times.
fn cancel_pairs(mut v: Vec<Monomial>) -> Vec<Monomial> {
    v.sort();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i + 1;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

fn merge_xor(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly { terms: Vec::new() }
    }

    pub fn one() -> MPoly {
        MPoly { terms: vec![Monomial::ONE] }
    }

    pub fn from_monomial(m: Monomial) -> MPoly {
        MPoly { terms: vec![m] }
    }

    pub fn var(v: Var) -> MPoly {
        MPoly::from_monomial(Monomial::var(v, 1).expect("exponent 1"))
    }

    /// Builds a polynomial from monomials, cancelling repeated ones in pairs.
    pub fn from_monomials_xor(monomials: impl IntoIterator<Item = Monomial>) -> MPoly {
        MPoly { terms: cancel_pairs(monomials.into_iter().collect()) }
    }

    /// Builds a polynomial from distinct monomials.
    pub fn from_distinct(monomials: impl IntoIterator<Item = Monomial>) -> Option<MPoly> {
        let mut terms: Vec<Monomial> = monomials.into_iter().collect();
        let n = terms.len();
        terms.sort();
        terms.dedup();
        (terms.len() == n).then_some(MPoly { terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomials in increasing lexicographic order.
    pub fn monomials(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn contains(&self, m: Monomial) -> bool {
        self.terms.binary_search(&m).is_ok()
    }

    /// Leading monomial under the lexicographic order.
    pub fn leading(&self) -> Option<Monomial> {
        self.terms.last().copied()
    }

    /// Toggles one monomial (adds it, or removes it if present).
    pub fn toggle(&self, m: Monomial) -> MPoly {
        self.add(&MPoly::from_monomial(m))
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        MPoly { terms: merge_xor(&self.terms, &other.terms) }
    }

    pub fn mul_monomial(&self, m: Monomial) -> Result<MPoly, MPolyError> {
        let terms = self.terms.iter().map(|t| t.mul(m)).collect::<Result<Vec<_>, _>>()?;
        Ok(MPoly { terms })
    }

    pub fn mul(&self, other: &MPoly) -> Result<MPoly, MPolyError> {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.is_zero() {
            return Ok(MPoly::zero());
        }
        if small.len() == 1 {
            return large.mul_monomial(small.terms[0]);
        }
        let per_chunk = (PAR_PRODUCT_CHUNK / large.len()).max(1);
        let partials = small
            .terms
            .par_chunks(per_chunk)
            .map(|chunk| -> Result<Vec<Monomial>, MPolyError> {
                let mut buf = Vec::with_capacity(chunk.len() * large.len());
                for &a in chunk {
                    for &b in &large.terms {
                        buf.push(a.mul(b)?);
                    }
                }
                Ok(cancel_pairs(buf))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MPoly { terms: merge_all(partials) })
    }

    /// Squaring is the Frobenius map: every exponent doubles.
    pub fn square(&self) -> Result<MPoly, MPolyError> {
        let terms = self.terms.iter().map(|t| t.mul(*t)).collect::<Result<Vec<_>, _>>()?;
        Ok(MPoly { terms })
    }

    pub fn pow(&self, e: u32) -> Result<MPoly, MPolyError> {
        let mut acc = MPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.square()?;
            }
        }
        Ok(acc)
    }

    /// Highest exponent of `v`, `None` for the zero polynomial.
    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms.iter().map(|t| t.degree(v)).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.total_degree()).max()
    }

    /// Highest total degree in the variables `vars`.
    pub fn degree_in_vars(&self, vars: &[Var]) -> Option<u32> {
        self.terms.iter().map(|t| t.degree_in(vars)).max()
    }

    /// The variables that occur with positive exponent.
    pub fn variables(&self) -> BTreeSet<Var> {
        Var::ALL.into_iter().filter(|&v| self.degree_in(v).unwrap_or(0) > 0).collect()
    }

    /// `Some(d)` when every monomial has total degree `d` in `vars`.
    pub fn homogeneous_degree(&self, vars: &[Var]) -> Result<Option<u32>, MPolyError> {
        let first = self.terms.first().ok_or(MPolyError::ZeroPolynomial)?.degree_in(vars);
        Ok(self.terms.iter().all(|t| t.degree_in(vars) == first).then_some(first))
    }

    /// Largest `k` with `v^k` dividing the polynomial.
    pub fn var_valuation(&self, v: Var) -> Result<u32, MPolyError> {
        self.terms.iter().map(|t| t.degree(v)).min().ok_or(MPolyError::ZeroPolynomial)
    }

    /// The gcd of all monomials.
    pub fn content(&self) -> Option<Monomial> {
        let mut it = self.terms.iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, &t| acc.gcd(t)))
    }

    pub fn strip_content(&self) -> MPoly {
        match self.content() {
            None => MPoly::zero(),
            Some(c) => MPoly { terms: self.terms.iter().map(|t| t.checked_div(c).expect("content divides")).collect() },
        }
    }

    /// Coefficients as a polynomial in `v`: entry `k` multiplies `v^k`, with `v` removed.
    pub fn coefficients_in(&self, v: Var) -> Vec<MPoly> {
        let deg = match self.degree_in(v) {
            None => return Vec::new(),
            Some(d) => d as usize,
        };
        let mut slices: Vec<Vec<Monomial>> = vec![Vec::new(); deg + 1];
        for &t in &self.terms {
            slices[t.degree(v) as usize].push(t.without(v));
        }
        slices
            .into_iter()
            .map(|mut s| {
                if !s.is_sorted() {
                    s.sort_unstable();
                }
                MPoly { terms: s }
            })
            .collect()
    }

    /// Inverse of [`MPoly::coefficients_in`]; coefficients must not involve `v`.
    pub fn from_coefficients(v: Var, coeffs: &[MPoly]) -> Result<MPoly, MPolyError> {
        let mut terms = Vec::with_capacity(coeffs.iter().map(MPoly::len).sum());
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let shift = Monomial::var(v, k as u32)?;
            for &t in &c.terms {
                debug_assert_eq!(t.degree(v), 0);
                terms.push(t.mul(shift)?);
            }
        }
        terms.sort_unstable();
        Ok(MPoly { terms })
    }

    /// The polynomial with `v := 0`.
    pub fn set_zero(&self, v: Var) -> MPoly {
        MPoly { terms: self.terms.iter().copied().filter(|t| t.degree(v) == 0).collect() }
    }

    /// `den^clear_power * self(v := num/den)`, a polynomial.
    pub fn substitute(&self, v: Var, num: &MPoly, den: &MPoly, clear_power: u32) -> Result<MPoly, MPolyError> {
        if den.is_zero() {
            return Err(MPolyError::ZeroDivisor);
        }
        let coeffs = self.coefficients_in(v);
        let degree = coeffs.len().saturating_sub(1) as u32;
        if clear_power < degree {
            return Err(MPolyError::InsufficientClearing { var: v, degree, clear_power });
        }
        let mut num_pows = vec![MPoly::one()];
        for j in 1..coeffs.len() {
            let next = num_pows[j - 1].mul(num)?;
            num_pows.push(next);
        }
        let mut den_pows = vec![MPoly::one()];
        for j in 1..=clear_power as usize {
            let next = if j % 2 == 0 { den_pows[j / 2].square()? } else { den_pows[j - 1].mul(den)? };
            den_pows.push(next);
        }
        let mut acc = MPoly::zero();
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = c.mul(&num_pows[j])?.mul(&den_pows[clear_power as usize - j])?;
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Exact division: `Some(q)` with `d * q == self`, or `None` when `d` does not divide.
    ///
    /// Division is recursive: both operands are read as polynomials in one main
    /// variable of `d`, and each leading coefficient of the running remainder is
    /// divided by the leading coefficient of `d` one level down. The quotient of an
    /// exact division is unique, so the choice of main variable only affects speed.
    pub fn divide_exact(&self, d: &MPoly) -> Result<Option<MPoly>, MPolyError> {
        if d.is_zero() {
            return Err(MPolyError::ZeroDivisor);
        }
        divide_rec(self, d)
    }

    /// Evaluates at an assignment of field elements.
    pub fn eval(&self, field: &FieldSpec, assignment: &Assignment) -> Result<Fe, MPolyError> {
        let mut raw = [0u64; NVARS];
        for v in self.variables() {
            let value = assignment.get(v).ok_or(MPolyError::UnassignedVariable(v))?;
            if value.field() != field {
                return Err(FieldError::FieldMismatch.into());
            }
            raw[v.index()] = value.bits();
        }
        Ok(field.element(self.eval_raw(field, &raw))?)
    }

    /// Evaluation on raw encodings. Variables absent from the polynomial are ignored.
    pub fn eval_raw(&self, field: &FieldSpec, values: &[u64; NVARS]) -> u64 {
        let powers = PowerTable::new(field, values, self);
        self.eval_with(field, &powers)
    }

    pub(crate) fn eval_with(&self, field: &FieldSpec, powers: &PowerTable) -> u64 {
        let mut acc = 0u64;
        for &t in &self.terms {
            let mut x = 1u64;
            for v in Var::ALL {
                let e = t.degree(v);
                if e > 0 {
                    x = field.mul(x, powers.get(v, e));
                }
            }
            acc ^= x;
        }
        acc
    }

    /// Specializes every variable except `kept` and returns the univariate result.
    pub(crate) fn specialize(&self, field: &FieldSpec, values: &[u64; NVARS], kept: Var) -> Vec<u64> {
        let mut vals = *values;
        vals[kept.index()] = 1;
        let powers = PowerTable::new(field, &vals, self);
        let deg = self.degree_in(kept).unwrap_or(0) as usize;
        let mut out = vec![0u64; deg + 1];
        for &t in &self.terms {
            let mut x = 1u64;
            for v in Var::ALL {
                let e = t.degree(v);
                if e > 0 && v != kept {
                    x = field.mul(x, powers.get(v, e));
                }
            }
            out[t.degree(kept) as usize] ^= x;
        }
        upoly::trim(&mut out);
        out
    }

    /// Parses a single-line expression such as `"be^12 u^9 + X + 1"`; `"0"` is zero.
    pub fn parse(text: &str) -> Result<MPoly, MPolyError> {
        let trimmed = text.trim();
        if trimmed == "0" {
            return Ok(MPoly::zero());
        }
        let mut terms = Vec::new();
        let mut col = 1;
        for piece in text.split('+') {
            let lead = piece.len() - piece.trim_start().len();
            let m = parse_monomial(piece.trim(), 1, col + lead)?;
            terms.push((m, col + lead));
            col += piece.len() + 1;
        }
        collect_distinct(terms, 1)
    }

    /// Canonical single-line form, leading monomial first.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

fn merge_all(mut parts: Vec<Vec<Monomial>>) -> Vec<Monomial> {
    while parts.len() > 1 {
        parts = parts
            .par_chunks(2)
            .map(|pair| if pair.len() == 2 { merge_xor(&pair[0], &pair[1]) } else { pair[0].clone() })
            .collect();
    }
    parts.pop().unwrap_or_default()
}

fn divide_rec(p: &MPoly, d: &MPoly) -> Result<Option<MPoly>, MPolyError> {
    if p.is_zero() {
        return Ok(Some(MPoly::zero()));
    }
    if d.len() == 1 {
        let m = d.terms[0];
        let mut terms = Vec::with_capacity(p.len());
        for &t in &p.terms {
            match t.checked_div(m) {
                Some(x) => terms.push(x),
                None => return Ok(None),
            }
        }
        return Ok(Some(MPoly { terms }));
    }
    // any variable whose degree varies in d works; a short leading coefficient keeps the recursion cheap
    let (main, dc) = Var::ALL
        .into_iter()
        .filter(|&v| {
            let first = d.terms[0].degree(v);
            d.terms.iter().any(|t| t.degree(v) != first)
        })
        .map(|v| (v, d.coefficients_in(v)))
        .min_by_key(|(_, c)| c.last().map_or(usize::MAX, MPoly::len))
        .expect("a non-monomial has a variable of varying degree");
    let n = dc.len() - 1;
    let lc = &dc[n];
    let mut rem = p.coefficients_in(main);
    if rem.len() <= n {
        return Ok(None);
    }
    let mut quot = vec![MPoly::zero(); rem.len() - n];
    for k in (n..rem.len()).rev() {
        if rem[k].is_zero() {
            continue;
        }
        let c = match divide_rec(&rem[k], lc)? {
            Some(c) => c,
            None => return Ok(None),
        };
        for (j, dj) in dc.iter().enumerate().take(n) {
            if !dj.is_zero() {
                let prod = c.mul(dj)?;
                rem[k - n + j] = rem[k - n + j].add(&prod);
            }
        }
        rem[k] = MPoly::zero();
        quot[k - n] = c;
    }
    if rem[..n].iter().any(|r| !r.is_zero()) {
        return Ok(None);
    }
    Ok(Some(MPoly::from_coefficients(main, &quot)?))
}

/// Cached powers of the assigned values, up to the degrees a polynomial needs.
pub(crate) struct PowerTable {
    powers: [Vec<u64>; NVARS],
}

impl PowerTable {
    pub(crate) fn new(field: &FieldSpec, values: &[u64; NVARS], poly: &MPoly) -> PowerTable {
        let mut max = [0u32; NVARS];
        for &t in &poly.terms {
            for v in Var::ALL {
                max[v.index()] = max[v.index()].max(t.degree(v));
            }
        }
        PowerTable::with_degrees(field, values, &max)
    }

    pub(crate) fn with_degrees(field: &FieldSpec, values: &[u64; NVARS], max: &[u32; NVARS]) -> PowerTable {
        let powers = std::array::from_fn(|i| {
            let mut p = Vec::with_capacity(max[i] as usize + 1);
            p.push(1u64);
            for k in 1..=max[i] as usize {
                p.push(field.mul(p[k - 1], values[i]));
            }
            p
        });
        PowerTable { powers }
    }

    #[inline]
    pub(crate) fn get(&self, v: Var, e: u32) -> u64 {
        self.powers[v.index()][e as usize]
    }
}

/// Values for some of the variables.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    values: [Option<Fe>; NVARS],
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn with(mut self, v: Var, value: Fe) -> Assignment {
        self.values[v.index()] = Some(value);
        self
    }

    pub fn set(&mut self, v: Var, value: Fe) {
        self.values[v.index()] = Some(value);
    }

    pub fn get(&self, v: Var) -> Option<&Fe> {
        self.values[v.index()].as_ref()
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> MPolyError {
    MPolyError::Parse { line, column, message: message.into() }
}

/// Parses space-separated `var^exp` tokens, or `1`.
fn parse_monomial(text: &str, line: usize, column: usize) -> Result<Monomial, MPolyError> {
    if text.is_empty() {
        return Err(parse_err(line, column, "expected a monomial"));
    }
    if text == "1" {
        return Ok(Monomial::ONE);
    }
    let mut exps = [0u32; NVARS];
    let mut offset = 0;
    for token in text.split(' ') {
        let col = column + offset;
        offset += token.len() + 1;
        if token.is_empty() {
            continue;
        }
        let (name, exp) = match token.split_once('^') {
            Some((n, e)) => {
                let e: u32 = e.parse().map_err(|_| parse_err(line, col + n.len() + 1, format!("bad exponent in '{token}'")))?;
                if e == 0 {
                    return Err(parse_err(line, col, format!("zero exponent in '{token}'")));
                }
                (n, e)
            }
            None => (token, 1),
        };
        let v = Var::from_name(name).ok_or_else(|| parse_err(line, col, format!("unknown variable '{name}'")))?;
        if exps[v.index()] != 0 {
            return Err(parse_err(line, col, format!("variable {v} repeated")));
        }
        if exp >= EXPONENT_CAP {
            return Err(MPolyError::ExponentOverflow { var: v });
        }
        exps[v.index()] = exp;
    }
    Monomial::from_exponents(exps)
}

fn collect_distinct(terms: Vec<(Monomial, usize)>, line_of_single: usize) -> Result<MPoly, MPolyError> {
    let mut seen = std::collections::HashMap::new();
    for (m, pos) in &terms {
        if seen.insert(*m, *pos).is_some() {
            return Err(MPolyError::DuplicateMonomial { line: line_of_single, column: *pos, monomial: m.to_string() });
        }
    }
    Ok(MPoly::from_distinct(terms.into_iter().map(|(m, _)| m)).expect("checked distinct"))
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({self})")
    }
}

impl FromStr for MPoly {
    type Err = MPolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MPoly::parse(s)
    }
}

// ---------------------------------------------------------------------------
// Certificate file format.

/// A named polynomial as stored in a certificate file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFile {
    pub name: String,
    pub vars: Vec<Var>,
    pub poly: MPoly,
}

/// Reads the certificate grammar: `poly <name>`, `vars: ...`, one monomial per line, `end`.
pub fn parse_poly_file(text: &str) -> Result<PolyFile, MPolyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim_end()))
        .filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty file"))?;
    let name = header
        .trim()
        .strip_prefix("poly ")
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty() && !s.contains(' '))
        .ok_or_else(|| parse_err(ln, 1, "expected 'poly <name>'"))?;
    let (ln, vars_line) = lines.next().ok_or_else(|| parse_err(ln + 1, 1, "expected 'vars:' line"))?;
    let vars_text = vars_line.trim().strip_prefix("vars:").ok_or_else(|| parse_err(ln, 1, "expected 'vars:' line"))?;
    let mut vars = Vec::new();
    for tok in vars_text.split_whitespace() {
        let v = Var::from_name(tok).ok_or_else(|| parse_err(ln, 1, format!("unknown variable '{tok}'")))?;
        if vars.contains(&v) {
            return Err(parse_err(ln, 1, format!("variable {v} listed twice")));
        }
        vars.push(v);
    }
    let mut seen: std::collections::HashMap<Monomial, usize> = std::collections::HashMap::new();
    let mut ended = false;
    for (ln, line) in lines {
        if ended {
            return Err(parse_err(ln, 1, "content after 'end'"));
        }
        let lead = line.len() - line.trim_start().len();
        let body = line.trim();
        if body == "end" {
            ended = true;
            continue;
        }
        let m = parse_monomial(body, ln, lead + 1)?;
        for v in Var::ALL {
            if m.degree(v) > 0 && !vars.contains(&v) {
                return Err(parse_err(ln, lead + 1, format!("variable {v} not declared")));
            }
        }
        if seen.insert(m, ln).is_some() {
            return Err(MPolyError::DuplicateMonomial { line: ln, column: lead + 1, monomial: m.to_string() });
        }
    }
    if !ended {
        return Err(parse_err(text.lines().count() + 1, 1, "missing 'end'"));
    }
    let poly = MPoly::from_distinct(seen.into_keys()).expect("distinct");
    Ok(PolyFile { name, vars, poly })
}

/// Writes the certificate grammar with monomials in canonical (descending) order.
pub fn write_poly_file(file: &PolyFile) -> String {
    let mut out = format!("poly {}\nvars:", file.name);
    for v in &file.vars {
        out.push(' ');
        out.push_str(v.name());
    }
    out.push('\n');
    for t in file.poly.monomials().iter().rev() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

// ---------------------------------------------------------------------------
// Randomized probes over an auxiliary extension field.

pub const DEFAULT_PROBE_EXT_DEGREE: u32 = 64;
pub const DEFAULT_PROBE_TRIALS: usize = 20;
pub const DEFAULT_PROBE_SEED: u64 = 0x5eed_c0de;

fn random_values(rng: &mut ChaCha8Rng, field: &FieldSpec) -> [u64; NVARS] {
    std::array::from_fn(|_| loop {
        let x = rng.gen::<u64>() & field.mask();
        if x != 0 {
            break x;
        }
    })
}

/// One-sided coprimality probe in the variable `kept`.
///
/// Each trial assigns random values to all other variables and computes a univariate
/// gcd. `true` means some trial found the specializations coprime, which rules out
/// a common factor of positive degree in `kept`. Trials where a specialization loses
/// degree in `kept` are discarded.
pub fn randomized_coprimality(
    p: &MPoly,
    q: &MPoly,
    kept: Var,
    ext_degree: u32,
    trials: usize,
    seed: u64,
) -> Result<bool, MPolyError> {
    if p.is_zero() || q.is_zero() {
        return Err(MPolyError::ZeroPolynomial);
    }
    let field = FieldSpec::probe_field(ext_degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dp, dq) = (p.degree_in(kept).unwrap_or(0) as usize, q.degree_in(kept).unwrap_or(0) as usize);
    let mut useful = false;
    for _ in 0..trials {
        let values = random_values(&mut rng, &field);
        let (sp, sq) = (p.specialize(&field, &values, kept), q.specialize(&field, &values, kept));
        if upoly::degree(&sp) != Some(dp) || upoly::degree(&sq) != Some(dq) {
            continue;
        }
        useful = true;
        if upoly::degree(&upoly::gcd(&field, &sp, &sq)) == Some(0) {
            return Ok(true);
        }
    }
    if useful {
        Ok(false)
    } else {
        Err(MPolyError::DegenerateSpecialization)
    }
}

/// Tries to refute `d | p` by specializing every variable except `kept`.
///
/// Returns `true` only with a proof of non-divisibility: a specialization under
/// which the univariate images leave a nonzero remainder.
pub fn refutes_divisibility(d: &MPoly, p: &MPoly, kept: Var, ext_degree: u32, trials: usize, seed: u64) -> Result<bool, MPolyError> {
    if d.is_zero() {
        return Err(MPolyError::ZeroDivisor);
    }
    let field = FieldSpec::probe_field(ext_degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let values = random_values(&mut rng, &field);
        let sd = d.specialize(&field, &values, kept);
        if sd.is_empty() {
            continue;
        }
        let sp = p.specialize(&field, &values, kept);
        if !upoly::rem(&field, &sp, &sd).is_empty() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2m::make_field;

    fn p(s: &str) -> MPoly {
        MPoly::parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let m = p("be^12 u^9");
        assert_eq!(m.len(), 1);
        let e = m.monomials()[0].exponents();
        assert_eq!(e, [0, 12, 0, 0, 0, 0, 9]);
        assert_eq!(p("1"), MPoly::one());
        assert!(matches!(MPoly::parse("X^2 + X^2"), Err(MPolyError::DuplicateMonomial { .. })));
        assert!(matches!(MPoly::parse("X^2 + W"), Err(MPolyError::Parse { column: 7, .. })));
        assert!(matches!(MPoly::parse("X^512"), Err(MPolyError::ExponentOverflow { var: Var::X })));
        assert_eq!(p("0"), MPoly::zero());
    }

    #[test]
    fn serialization_is_canonical() {
        let a = p("Y + X^2 + 1 + al be");
        assert_eq!(a.serialize(), "al be + X^2 + Y + 1");
        assert_eq!(p(&a.serialize()), a);
    }

    #[test]
    fn ring_examples() {
        let s = p("X + Y");
        assert!(s.add(&s).is_zero());
        assert_eq!(s.mul(&s).unwrap(), p("X^2 + Y^2"));
        assert_eq!(s.square().unwrap(), p("X^2 + Y^2"));
        assert_eq!(p("X + 1").pow(3).unwrap(), p("X^3 + X^2 + X + 1"));
        let big = MPoly::from_monomial(Monomial::var(Var::X, 300).unwrap());
        assert_eq!(big.mul(&big).unwrap_err(), MPolyError::ExponentOverflow { var: Var::X });
    }

    #[test]
    fn division_examples() {
        assert_eq!(p("X^2 + Y^2").divide_exact(&p("X + Y")).unwrap(), Some(p("X + Y")));
        assert_eq!(p("X^2 + X Y + Y^2").divide_exact(&p("X + Y")).unwrap(), None);
        assert_eq!(p("X").divide_exact(&MPoly::zero()).unwrap_err(), MPolyError::ZeroDivisor);
        let a = p("al^2 be + X Z u + be^3 + 1");
        let b = p("Y^4 + be X u^2 + al");
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.divide_exact(&a).unwrap(), Some(b.clone()));
        assert_eq!(prod.divide_exact(&b).unwrap(), Some(a.clone()));
        assert_eq!(prod.toggle(Monomial::ONE).divide_exact(&a).unwrap(), None);
        // divisor with a variable of constant degree
        let d = p("X Y + X Z");
        assert_eq!(d.mul(&b).unwrap().divide_exact(&d).unwrap(), Some(b));
    }

    #[test]
    fn substitution_examples() {
        let x = p("X + 1");
        assert_eq!(x.substitute(Var::X, &p("Y"), &MPoly::one(), 1).unwrap(), p("Y + 1"));
        let a = p("Y + Z");
        let b = p("u");
        assert_eq!(p("X^2").substitute(Var::X, &a, &b, 2).unwrap(), a.square().unwrap());
        assert_eq!(
            p("X^2").substitute(Var::X, &a, &b, 1).unwrap_err(),
            MPolyError::InsufficientClearing { var: Var::X, degree: 2, clear_power: 1 }
        );
        // (X + 1) with X := Y/u cleared by u^2: Y u + u^2
        assert_eq!(x.substitute(Var::X, &p("Y"), &b, 2).unwrap(), p("Y u + u^2"));
    }

    #[test]
    fn degree_queries() {
        assert_eq!(p("X + Y^2").homogeneous_degree(&[Var::X, Var::Y]).unwrap(), None);
        assert_eq!(p("X^2 Y^3").homogeneous_degree(&[Var::X, Var::Y]).unwrap(), Some(5));
        assert_eq!(MPoly::zero().homogeneous_degree(&[Var::X]).unwrap_err(), MPolyError::ZeroPolynomial);
        assert_eq!(p("X^2 Y").var_valuation(Var::X).unwrap(), 2);
        assert_eq!(p("X^2 Y + X^5").var_valuation(Var::X).unwrap(), 2);
        assert_eq!(p("X^2 Y u + X^5 u^3").strip_content(), p("Y + X^3 u^2"));
        assert_eq!(p("X^2 Y + Z").set_zero(Var::X), p("Z"));
    }

    #[test]
    fn evaluation_examples() {
        let f = make_field(9, None).unwrap();
        let asg = Assignment::new()
            .with(Var::Be, f.element(5).unwrap())
            .with(Var::Y, f.element(5).unwrap())
            .with(Var::U, f.element(77).unwrap());
        assert_eq!(MPoly::one().eval(&f, &asg).unwrap().bits(), 1);
        assert!(p("be^2 u + Y^2 u").eval(&f, &asg).unwrap().is_zero());
        assert_eq!(p("X + 1").eval(&f, &asg).unwrap_err(), MPolyError::UnassignedVariable(Var::X));
    }

    #[test]
    fn coprimality_examples() {
        let a = p("Z + be");
        let b = p("Z + Y");
        assert!(randomized_coprimality(&a, &b, Var::Z, 64, 20, 1).unwrap());
        let c = p("Z^2 + Y u + 1");
        assert!(!randomized_coprimality(&a, &a.mul(&c).unwrap(), Var::Z, 64, 20, 1).unwrap());
        assert_eq!(randomized_coprimality(&a, &MPoly::zero(), Var::Z, 64, 20, 1).unwrap_err(), MPolyError::ZeroPolynomial);
    }

    #[test]
    fn divisibility_refutation() {
        let a = p("X^3 + be X + u");
        let b = p("X + Y Z");
        let prod = a.mul(&b).unwrap();
        assert!(!refutes_divisibility(&a, &prod, Var::X, 64, 5, 3).unwrap());
        assert!(refutes_divisibility(&a, &prod.toggle(Monomial::ONE), Var::X, 64, 5, 3).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let text = "poly g\nvars: be X u\n# comment\nbe^12 u^9\nX u  # trailing\n1\nend\n";
        let file = parse_poly_file(text).unwrap();
        assert_eq!(file.name, "g");
        assert_eq!(file.poly, p("be^12 u^9 + X u + 1"));
        let again = parse_poly_file(&write_poly_file(&file)).unwrap();
        assert_eq!(again, file);
        assert!(matches!(parse_poly_file("poly g\nvars: X\nY\nend\n"), Err(MPolyError::Parse { line: 3, .. })));
        assert!(matches!(parse_poly_file("poly g\nvars: X\nX\nX\nend\n"), Err(MPolyError::DuplicateMonomial { line: 4, .. })));
        assert!(matches!(parse_poly_file("poly g\nvars: X\nX\n"), Err(MPolyError::Parse { .. })));
        assert!(matches!(parse_poly_file(""), Err(MPolyError::Parse { .. })));
        let zero = parse_poly_file("poly a13\nvars: be Y Z u\nend\n").unwrap();
        assert!(zero.poly.is_zero());
    }
}
