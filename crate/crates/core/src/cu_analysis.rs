//! The map `C_u(X, Y, Z) = (X^3 + u Y^2 Z, Y^3 + u X Z^2, Z^3 + u X^2 Y)` on GF(2^m)^3.
//!
//! Exhaustive scans address a point by the packed index `x << 2m | y << m | z`,
//! so adding two points is an XOR of their indices.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::certify::CertificateSet;
use crate::field2m::{FieldError, FieldSpec, Fe};
use crate::mpoly::{Var, NVARS};

/// Largest `m` for the exhaustive `q^3` scans.
pub const MAX_SCAN_DEGREE: u32 = 11;
/// Largest `m` for the exhaustive difference distribution table.
pub const MAX_DDT_DEGREE: u32 = 6;
/// Largest `m` for the Θ enumeration over `q^4` tuples.
pub const MAX_THETA_DEGREE: u32 = 6;
// above this the image table is not precomputed
const IMAGE_TABLE_DEGREE: u32 = 8;
// odd, so k -> k * STRIDE permutes the indices modulo any power of two
const DIRECTION_STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("GF(2^{m}) is too large for this scan (limit m <= {limit})")]
    TooLarge { m: u32, limit: u32 },
    #[error("u must be nonzero")]
    ZeroParameter,
    #[error("u is not a 7th power")]
    NotSeventhPower,
    #[error("beta must be nonzero")]
    ZeroBeta,
    #[error("certificate evaluation failed: {0}")]
    CertificateEvaluation(String),
    #[error("tuple (x, y, z, a, b, c) = {0:?} accepted by the guard has a nonzero residual")]
    ThetaViolation([u64; 6]),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A point of GF(2^m)^3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point3 {
    pub x: Fe,
    pub y: Fe,
    pub z: Fe,
}

/// A difference triple `(a, b, c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delta3 {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
}

fn same_field(parts: &[&Fe]) -> Result<(), AnalysisError> {
    let f = parts[0].field();
    if parts.iter().all(|p| p.field() == f) {
        Ok(())
    } else {
        Err(FieldError::FieldMismatch.into())
    }
}

impl Point3 {
    pub fn new(x: Fe, y: Fe, z: Fe) -> Result<Point3, AnalysisError> {
        same_field(&[&x, &y, &z])?;
        Ok(Point3 { x, y, z })
    }

    pub fn from_bits(field: &FieldSpec, x: u64, y: u64, z: u64) -> Result<Point3, AnalysisError> {
        Ok(Point3 { x: field.element(x)?, y: field.element(y)?, z: field.element(z)? })
    }

    pub fn field(&self) -> &FieldSpec {
        self.x.field()
    }

    pub fn bits(&self) -> [u64; 3] {
        [self.x.bits(), self.y.bits(), self.z.bits()]
    }

    pub fn add(&self, d: &Delta3) -> Result<Point3, AnalysisError> {
        Point3::new(self.x.add(&d.a)?, self.y.add(&d.b)?, self.z.add(&d.c)?)
    }

    /// The cyclic shift `(x, y, z) -> (y, z, x)`.
    pub fn rotate(&self) -> Point3 {
        Point3 { x: self.y.clone(), y: self.z.clone(), z: self.x.clone() }
    }

    fn packed(&self) -> u64 {
        pack(self.field().m(), self.x.bits(), self.y.bits(), self.z.bits())
    }
}

impl Delta3 {
    pub fn new(a: Fe, b: Fe, c: Fe) -> Result<Delta3, AnalysisError> {
        same_field(&[&a, &b, &c])?;
        Ok(Delta3 { a, b, c })
    }

    pub fn from_bits(field: &FieldSpec, a: u64, b: u64, c: u64) -> Result<Delta3, AnalysisError> {
        Ok(Delta3 { a: field.element(a)?, b: field.element(b)?, c: field.element(c)? })
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn bits(&self) -> [u64; 3] {
        [self.a.bits(), self.b.bits(), self.c.bits()]
    }
}

#[inline]
fn pack(m: u32, x: u64, y: u64, z: u64) -> u64 {
    x << (2 * m) | y << m | z
}

#[inline]
fn unpack(m: u32, p: u64) -> [u64; 3] {
    let mask = (1u64 << m) - 1;
    [p >> (2 * m), (p >> m) & mask, p & mask]
}

/// Two points with equal images under `C_u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionWitness {
    pub point: Point3,
    pub delta: Delta3,
    pub u: Fe,
    pub verified: bool,
}

impl CollisionWitness {
    /// Checks the collision and records the outcome.
    pub fn new(u: Fe, point: Point3, delta: Delta3) -> Result<CollisionWitness, AnalysisError> {
        let verified = !delta.is_zero() && cu_eval(&u, &point)? == cu_eval(&u, &point.add(&delta)?)?;
        Ok(CollisionWitness { point, delta, u, verified })
    }

    /// Re-runs the collision check from scratch.
    pub fn recheck(&self) -> bool {
        CollisionWitness::new(self.u.clone(), self.point.clone(), self.delta.clone()).is_ok_and(|w| w.verified)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = self.u.field();
        let hex = |bits: [u64; 3]| bits.iter().map(|b| format!("{b:#x}")).collect::<Vec<_>>();
        json!({
            "m": f.m(),
            "modulus": format!("{:#x}", f.modulus()),
            "u": format!("{:#x}", self.u.bits()),
            "point": hex(self.point.bits()),
            "delta": hex(self.delta.bits()),
            "verified": self.verified,
        })
    }
}

/// Result of a differential scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DduReport {
    pub u: Fe,
    /// The largest count found; with early exit, the exact count of the first
    /// (direction, output) pair above the threshold.
    pub uniformity: u64,
    pub witness_direction: Delta3,
    pub witness_output: Point3,
    pub exhaustive: bool,
}

impl DduReport {
    pub fn to_json(&self) -> serde_json::Value {
        let hex = |bits: [u64; 3]| bits.iter().map(|b| format!("{b:#x}")).collect::<Vec<_>>();
        json!({
            "u": format!("{:#x}", self.u.bits()),
            "uniformity": self.uniformity,
            "direction": hex(self.witness_direction.bits()),
            "output": hex(self.witness_output.bits()),
            "exhaustive": self.exhaustive,
        })
    }
}

// ---------------------------------------------------------------------------
// Kernels on raw encodings.

/// Lookup tables for fast evaluation at a fixed `u`.
struct Kernel {
    field: FieldSpec,
    m: u32,
    cube: Vec<u32>,
    sq: Vec<u32>,
    u_sq: Vec<u32>,
    u_lin: Vec<u32>,
}

impl Kernel {
    fn new(field: &FieldSpec, u: u64) -> Kernel {
        let q = field.q() as usize;
        let sq: Vec<u32> = (0..q as u64).map(|x| field.square(x) as u32).collect();
        let cube = (0..q as u64).map(|x| field.mul(sq[x as usize] as u64, x) as u32).collect();
        let u_sq = (0..q).map(|x| field.mul(u, sq[x] as u64) as u32).collect();
        let u_lin = (0..q as u64).map(|x| field.mul(u, x) as u32).collect();
        Kernel { field: field.clone(), m: field.m(), cube, sq, u_sq, u_lin }
    }

    #[inline]
    fn eval(&self, x: u64, y: u64, z: u64) -> [u64; 3] {
        let f = &self.field;
        let (xi, yi, zi) = (x as usize, y as usize, z as usize);
        [
            self.cube[xi] as u64 ^ f.mul(self.u_sq[yi] as u64, z),
            self.cube[yi] as u64 ^ f.mul(self.u_lin[xi] as u64, self.sq[zi] as u64),
            self.cube[zi] as u64 ^ f.mul(self.u_sq[xi] as u64, y),
        ]
    }

    #[inline]
    fn eval_packed(&self, p: u64) -> u64 {
        let [x, y, z] = unpack(self.m, p);
        let [a, b, c] = self.eval(x, y, z);
        pack(self.m, a, b, c)
    }
}

fn check_scan_size(field: &FieldSpec, limit: u32) -> Result<(), AnalysisError> {
    if field.m() > limit {
        Err(AnalysisError::TooLarge { m: field.m(), limit })
    } else {
        Ok(())
    }
}

fn check_u(field: &FieldSpec, u: &Fe) -> Result<(), AnalysisError> {
    if u.field() != field {
        Err(FieldError::FieldMismatch.into())
    } else {
        Ok(())
    }
}

/// Evaluates `C_u(p)`.
pub fn cu_eval(u: &Fe, p: &Point3) -> Result<Point3, AnalysisError> {
    same_field(&[u, &p.x, &p.y, &p.z])?;
    let [x, y, z] = cu_eval_raw(u.field(), u.bits(), p.bits());
    Point3::from_bits(u.field(), x, y, z)
}

/// `C_u` on raw encodings.
pub fn cu_eval_raw(f: &FieldSpec, u: u64, [x, y, z]: [u64; 3]) -> [u64; 3] {
    [
        f.mul(x, f.square(x)) ^ f.mul(u, f.mul(f.square(y), z)),
        f.mul(y, f.square(y)) ^ f.mul(u, f.mul(x, f.square(z))),
        f.mul(z, f.square(z)) ^ f.mul(u, f.mul(f.square(x), y)),
    ]
}

/// The left sides of the expanded difference system at `(d, p)`.
pub fn system_residual_raw(f: &FieldSpec, u: u64, [a, b, c]: [u64; 3], [x, y, z]: [u64; 3]) -> [u64; 3] {
    let m = |p: u64, q: u64| f.mul(p, q);
    let s = |p: u64| f.square(p);
    [
        m(a, s(x)) ^ m(s(a), x) ^ m(s(a), a) ^ m(u, m(c, s(y)) ^ m(s(b), z) ^ m(s(b), c)),
        m(b, s(y)) ^ m(s(b), y) ^ m(s(b), b) ^ m(u, m(s(c), x) ^ m(a, s(z)) ^ m(a, s(c))),
        m(c, s(z)) ^ m(s(c), z) ^ m(s(c), c) ^ m(u, m(b, s(x)) ^ m(s(a), y) ^ m(s(a), b)),
    ]
}

/// `C_u(p + d) + C_u(p)`.
pub fn diff_residual(u: &Fe, d: &Delta3, p: &Point3) -> Result<Point3, AnalysisError> {
    let shifted = p.add(d)?;
    let (a, b) = (cu_eval(u, &shifted)?, cu_eval(u, p)?);
    let out = Point3::new(a.x.add(&b.x)?, a.y.add(&b.y)?, a.z.add(&b.z)?)?;
    debug_assert_eq!(out.bits(), system_residual_raw(u.field(), u.bits(), d.bits(), p.bits()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Permutation test.

struct Bitset(Vec<AtomicU64>);

impl Bitset {
    fn new(bits: u64) -> Bitset {
        Bitset((0..bits.div_ceil(64)).map(|_| AtomicU64::new(0)).collect())
    }

    /// Sets the bit and returns whether it was already set.
    #[inline]
    fn test_and_set(&self, i: u64) -> bool {
        let mask = 1u64 << (i % 64);
        self.0[(i / 64) as usize].fetch_or(mask, Ordering::Relaxed) & mask != 0
    }

    fn clear(&self) {
        for w in &self.0 {
            w.store(0, Ordering::Relaxed);
        }
    }
}

/// Exhaustively tests whether `C_u` is a bijection of GF(2^m)^3.
///
/// On failure the witness is canonical: `point + delta` is the smallest index
/// whose image repeats, and `point` the smallest earlier index with that image.
pub fn is_permutation(field: &FieldSpec, u: &Fe) -> Result<(bool, Option<CollisionWitness>), AnalysisError> {
    check_u(field, u)?;
    check_scan_size(field, MAX_SCAN_DEGREE)?;
    if u.is_zero() {
        return Err(AnalysisError::ZeroParameter);
    }
    let kernel = Kernel::new(field, u.bits());
    let m = field.m();
    let total = 1u64 << (3 * m);
    let seen = Bitset::new(total);
    let repeat = AtomicBool::new(false);
    // parallel occupancy pass, partitioned by x
    (0..1u64 << m).into_par_iter().for_each(|x| {
        if repeat.load(Ordering::Relaxed) {
            return;
        }
        for yz in 0..1u64 << (2 * m) {
            let img = kernel.eval_packed(x << (2 * m) | yz);
            if seen.test_and_set(img) {
                repeat.store(true, Ordering::Relaxed);
                return;
            }
        }
    });
    if !repeat.load(Ordering::Relaxed) {
        return Ok((true, None));
    }
    // sequential rescan for the canonical pair
    seen.clear();
    let second = (0..total).find(|&p| seen.test_and_set(kernel.eval_packed(p))).expect("a repeat exists");
    let target = kernel.eval_packed(second);
    let first = (0..second).find(|&p| kernel.eval_packed(p) == target).expect("earlier preimage");
    let [x, y, z] = unpack(m, first);
    let [a, b, c] = unpack(m, first ^ second);
    let w = CollisionWitness::new(u.clone(), Point3::from_bits(field, x, y, z)?, Delta3::from_bits(field, a, b, c)?)?;
    debug_assert!(w.verified);
    Ok((false, Some(w)))
}

// ---------------------------------------------------------------------------
// Differential uniformity.

enum Images<'a> {
    Table(Vec<u32>),
    OnTheFly(&'a Kernel),
}

impl Images<'_> {
    #[inline]
    fn get(&self, p: u64) -> u64 {
        match self {
            Images::Table(t) => t[p as usize] as u64,
            Images::OnTheFly(k) => k.eval_packed(p),
        }
    }
}

fn images(kernel: &Kernel) -> Images<'_> {
    if kernel.m <= IMAGE_TABLE_DEGREE {
        Images::Table((0..1u64 << (3 * kernel.m)).map(|p| kernel.eval_packed(p) as u32).collect())
    } else {
        Images::OnTheFly(kernel)
    }
}

/// Counts of `C_u(p + d) + C_u(p)` over all outputs, indexed by packed output.
pub fn ddt_row(field: &FieldSpec, u: &Fe, d: &Delta3) -> Result<Vec<u32>, AnalysisError> {
    check_u(field, u)?;
    check_scan_size(field, IMAGE_TABLE_DEGREE)?;
    let kernel = Kernel::new(field, u.bits());
    let img = images(&kernel);
    let [a, b, c] = d.bits();
    Ok(row_counts(&img, 3 * field.m(), pack(field.m(), a, b, c)))
}

fn row_counts(img: &Images, bits: u32, d: u64) -> Vec<u32> {
    let mut counts = vec![0u32; 1 << bits];
    for p in 0..1u64 << bits {
        counts[(img.get(p) ^ img.get(p ^ d)) as usize] += 1;
    }
    counts
}

/// Differential uniformity of `C_u`.
///
/// With `early_exit_above = Some(t)` the scan visits directions in a fixed
/// pseudo-random order and stops at the first output reached more than `t`
/// times; the report then has `exhaustive = false`. Otherwise every nonzero
/// direction is scanned and the witness is the smallest direction, then the
/// smallest output, that attains the maximum.
pub fn differential_uniformity(field: &FieldSpec, u: &Fe, early_exit_above: Option<u64>) -> Result<DduReport, AnalysisError> {
    check_u(field, u)?;
    match early_exit_above {
        None => exhaustive_uniformity(field, u),
        Some(t) => {
            if u.is_zero() {
                return Err(AnalysisError::ZeroParameter);
            }
            early_exit_uniformity(field, u, t)
        }
    }
}

fn exhaustive_uniformity(field: &FieldSpec, u: &Fe) -> Result<DduReport, AnalysisError> {
    check_scan_size(field, MAX_DDT_DEGREE)?;
    let m = field.m();
    let kernel = Kernel::new(field, u.bits());
    let img = images(&kernel);
    // best = (count, direction, output); larger count wins, then smaller indices
    let best = (1u64..1 << (3 * m))
        .into_par_iter()
        .map(|d| {
            let counts = row_counts(&img, 3 * m, d);
            let (out, &cnt) = counts.iter().enumerate().rev().max_by_key(|(_, &c)| c).expect("nonempty");
            (cnt as u64, d, out as u64)
        })
        .reduce_with(|a, b| if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) { b } else { a })
        .expect("at least one direction");
    report(field, u, best, true)
}

fn report(field: &FieldSpec, u: &Fe, (count, d, out): (u64, u64, u64), exhaustive: bool) -> Result<DduReport, AnalysisError> {
    let m = field.m();
    let [a, b, c] = unpack(m, d);
    let [x, y, z] = unpack(m, out);
    Ok(DduReport {
        u: u.clone(),
        uniformity: count,
        witness_direction: Delta3::from_bits(field, a, b, c)?,
        witness_output: Point3::from_bits(field, x, y, z)?,
        exhaustive,
    })
}

fn early_exit_uniformity(field: &FieldSpec, u: &Fe, threshold: u64) -> Result<DduReport, AnalysisError> {
    check_scan_size(field, MAX_SCAN_DEGREE)?;
    let m = field.m();
    let total = 1u64 << (3 * m);
    let kernel = Kernel::new(field, u.bits());
    let img = images(&kernel);
    let direction = |k: u64| k.wrapping_mul(DIRECTION_STRIDE) & (total - 1);
    let residual = |p: u64, d: u64| img.get(p) ^ img.get(p ^ d);
    // largest count seen so far, in visiting order
    let mut best = (0u64, direction(1), 0u64);
    if threshold == 2 {
        let seen = Bitset::new(total);
        for k in 1..total {
            let d = direction(k);
            seen.clear();
            // solutions come in pairs {p, p + d}; an output met by two pairs has count >= 4
            let hit = (0..total).filter(|&p| p < p ^ d).map(|p| residual(p, d)).find(|&o| seen.test_and_set(o));
            if let Some(o) = hit {
                let exact = (0..total).filter(|&p| residual(p, d) == o).count() as u64;
                return report(field, u, (exact, d, o), false);
            }
        }
        best = (2, best.1, residual(0, best.1));
    } else {
        check_scan_size(field, IMAGE_TABLE_DEGREE)?;
        let mut counts = vec![0u32; total as usize];
        for k in 1..total {
            let d = direction(k);
            counts.iter_mut().for_each(|c| *c = 0);
            for p in 0..total {
                let o = residual(p, d);
                counts[o as usize] += 1;
                let c = counts[o as usize] as u64;
                if c > best.0 {
                    best = (c, d, o);
                }
            }
            if best.0 > threshold {
                return report(field, u, best, false);
            }
        }
    }
    // every direction stayed at or below the threshold
    report(field, u, best, true)
}

// ---------------------------------------------------------------------------
// Constructive witnesses.

/// A collision from `u = w^7`: `al = w be`, `ga = 0`, and the case-2 system solved for `X, Z`.
pub fn collision_from_7th_power(field: &FieldSpec, u: &Fe, beta: &Fe, y_seed: &Fe) -> Result<CollisionWitness, AnalysisError> {
    same_field(&[u, beta, y_seed])?;
    check_u(field, u)?;
    if u.is_zero() {
        return Err(AnalysisError::ZeroParameter);
    }
    if beta.is_zero() {
        return Err(AnalysisError::ZeroBeta);
    }
    let f = field;
    let w = f.seventh_root(u.bits())?.ok_or(AnalysisError::NotSeventhPower)?;
    let (b, y) = (beta.bits(), y_seed.bits());
    let al = f.mul(w, b);
    let xp = f.sqrt(y ^ 1);
    let ypart = f.square(y) ^ y ^ 1;
    let zp = f.sqrt(f.mul(f.mul(f.pow(b, 3), ypart), f.inv(f.mul(u.bits(), al))?));
    let point = Point3::from_bits(f, f.mul(al, xp), f.mul(b, y), zp)?;
    let delta = Delta3::from_bits(f, al, b, 0)?;
    CollisionWitness::new(u.clone(), point, delta)
}

/// The seeds `0, 1, g, g^2, ...` tried by [`seventh_power_witness`].
pub fn y_seed_order(field: &FieldSpec) -> impl Iterator<Item = u64> + '_ {
    let g = field.generator();
    std::iter::once(0).chain(std::iter::successors(Some(1u64), move |&x| Some(field.mul(x, g))).take(field.mask() as usize))
}

/// [`collision_from_7th_power`] with `beta = 1` and the first seed that verifies.
pub fn seventh_power_witness(field: &FieldSpec, u: &Fe) -> Result<CollisionWitness, AnalysisError> {
    let one = field.one();
    let mut last = None;
    for y in y_seed_order(field) {
        let w = collision_from_7th_power(field, u, &one, &field.element(y)?)?;
        if w.verified {
            return Ok(w);
        }
        last = Some(w);
    }
    Ok(last.expect("the field is nonempty"))
}

/// A collision inside the cube map when `m` is even: `(1, 0, 0)` and `(w, 0, 0)` with `w^3 = 1`.
pub fn cube_fiber_witness(field: &FieldSpec, u: &Fe) -> Result<Option<CollisionWitness>, AnalysisError> {
    check_u(field, u)?;
    let order = field.mask();
    if !order.is_multiple_of(3) {
        return Ok(None);
    }
    let w = field.pow(field.generator(), (order / 3) as u128);
    let w = w.min(field.square(w));
    let point = Point3::from_bits(field, 1, 0, 0)?;
    let delta = Delta3::from_bits(field, w ^ 1, 0, 0)?;
    CollisionWitness::new(u.clone(), point, delta).map(Some)
}

/// Which route produced a non-permutation witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessRoute {
    CubeFiber,
    SeventhPower,
    Exhaustive,
}

/// Finds a collision of `C_u` by the cheapest applicable route; `None` only when
/// an exhaustive scan shows `C_u` is a permutation.
pub fn nonpermutation_witness(field: &FieldSpec, u: &Fe) -> Result<Option<(WitnessRoute, CollisionWitness)>, AnalysisError> {
    check_u(field, u)?;
    if u.is_zero() {
        return Err(AnalysisError::ZeroParameter);
    }
    if field.m().is_multiple_of(2) {
        if let Some(w) = cube_fiber_witness(field, u)? {
            return Ok(Some((WitnessRoute::CubeFiber, w)));
        }
    }
    if field.is_seventh_power(u.bits())? {
        let w = seventh_power_witness(field, u)?;
        if w.verified {
            return Ok(Some((WitnessRoute::SeventhPower, w)));
        }
    }
    let (_, w) = is_permutation(field, u)?;
    Ok(w.map(|w| (WitnessRoute::Exhaustive, w)))
}

// ---------------------------------------------------------------------------
// Θ enumeration.

/// A tuple `(x, y, z, a, b, c)` of the certified solution set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaTuple {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl ThetaTuple {
    /// Whether the difference `(a, b, c)` is zero.
    pub fn is_trivial(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }
}

/// Enumerates `(b, x, y, z)` with `(b + y) h != 0` and `S = 0`, derives `a = g/h`
/// and `c = f`, and checks `C_u(x + a, y + b, z + c) = C_u(x, y, z)`.
///
/// Any accepted tuple with a nonzero residual is an error.
pub fn theta_scan(field: &FieldSpec, u: &Fe, certs: &CertificateSet) -> Result<Vec<ThetaTuple>, AnalysisError> {
    check_u(field, u)?;
    check_scan_size(field, MAX_THETA_DEGREE)?;
    let q = field.q() as u64;
    let uu = u.bits();
    let mut found: Vec<ThetaTuple> = (0..q)
        .into_par_iter()
        .map(|b| -> Result<Vec<ThetaTuple>, AnalysisError> {
            let mut out = Vec::new();
            let mut vals = [0u64; NVARS];
            vals[Var::Be.index()] = b;
            vals[Var::U.index()] = uu;
            for y in 0..q {
                if y == b {
                    continue;
                }
                vals[Var::Y.index()] = y;
                for z in 0..q {
                    vals[Var::Z.index()] = z;
                    let coeffs: Vec<u64> = certs.a.iter().map(|a| a.eval_raw(field, &vals)).collect();
                    for x in 0..q {
                        let s = coeffs.iter().rev().fold(0u64, |acc, &c| field.mul(acc, x) ^ c);
                        if s != 0 {
                            continue;
                        }
                        let Some((a, c)) = certs.theta_solution(field, b, x, y, z, uu) else { continue };
                        let t = ThetaTuple { x, y, z, a, b, c };
                        let r = system_residual_raw(field, uu, [a, b, c], [x, y, z]);
                        let d = cu_eval_raw(field, uu, [x ^ a, y ^ b, z ^ c]);
                        let e = cu_eval_raw(field, uu, [x, y, z]);
                        if r != [0; 3] || d != e {
                            return Err(AnalysisError::ThetaViolation([x, y, z, a, b, c]));
                        }
                        out.push(t);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    found.sort_by_key(|t| (t.b, t.y, t.z, t.x));
    Ok(found)
}

/// Index of a point in the packed enumeration order.
pub fn packed_index(p: &Point3) -> u64 {
    p.packed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2m::make_field;

    fn gf(m: u32) -> FieldSpec {
        make_field(m, None).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = gf(3);
        let u = f.element(2).unwrap();
        let p = Point3::from_bits(&f, 5, 0, 0).unwrap();
        assert_eq!(cu_eval(&u, &p).unwrap().bits(), [f.pow(5, 3), 0, 0]);
        assert_eq!(cu_eval(&u, &Point3::from_bits(&f, 0, 0, 0).unwrap()).unwrap().bits(), [0, 0, 0]);
        assert_eq!(cu_eval(&u, &Point3::from_bits(&f, 1, 1, 1).unwrap()).unwrap().bits(), [3, 3, 3]);
        let other = gf(4).element(1).unwrap();
        assert!(cu_eval(&other, &p).is_err());
    }

    #[test]
    fn kernel_matches_direct_evaluation() {
        let f = gf(4);
        let k = Kernel::new(&f, 7);
        for p in 0..1u64 << 12 {
            let [x, y, z] = unpack(4, p);
            assert_eq!(k.eval(x, y, z), cu_eval_raw(&f, 7, [x, y, z]));
        }
    }

    #[test]
    fn permutation_examples() {
        let f = gf(3);
        assert!(is_permutation(&f, &f.element(2).unwrap()).unwrap().0);
        let f4 = gf(4);
        let (perm, w) = is_permutation(&f4, &f4.one()).unwrap();
        assert!(!perm && w.unwrap().verified);
        assert_eq!(is_permutation(&f, &f.zero()).unwrap_err(), AnalysisError::ZeroParameter);
        assert!(matches!(is_permutation(&gf(12), &gf(12).one()), Err(AnalysisError::TooLarge { .. })));
    }

    #[test]
    fn uniformity_baseline() {
        let f = gf(3);
        let r = differential_uniformity(&f, &f.zero(), None).unwrap();
        assert_eq!(r.uniformity, 128);
        assert!(r.exhaustive);
        assert_eq!(differential_uniformity(&f, &f.element(2).unwrap(), None).unwrap().uniformity, 2);
    }

    #[test]
    fn seventh_power_examples() {
        let f = gf(5);
        let u = f.element(2).unwrap();
        assert_eq!(f.seventh_root(2).unwrap(), Some(f.pow(2, 9)));
        let w = collision_from_7th_power(&f, &u, &f.one(), &f.zero()).unwrap();
        assert!(w.verified);
        let f9 = gf(9);
        let g = f9.element(f9.generator()).unwrap();
        let w = collision_from_7th_power(&f9, &g.pow(7), &g, &g.pow(3)).unwrap();
        assert!(w.verified);
        assert_eq!(collision_from_7th_power(&f9, &g, &g, &g).unwrap_err(), AnalysisError::NotSeventhPower);
        assert_eq!(collision_from_7th_power(&f9, &g.pow(7), &f9.zero(), &g).unwrap_err(), AnalysisError::ZeroBeta);
    }

    #[test]
    fn witness_dispatch() {
        let f4 = gf(4);
        let (route, w) = nonpermutation_witness(&f4, &f4.element(2).unwrap()).unwrap().unwrap();
        assert_eq!(route, WitnessRoute::CubeFiber);
        assert!(w.verified);
        let f7 = gf(7);
        let (route, w) = nonpermutation_witness(&f7, &f7.element(93).unwrap()).unwrap().unwrap();
        assert_eq!(route, WitnessRoute::SeventhPower);
        assert!(w.recheck());
        let f3 = gf(3);
        assert!(nonpermutation_witness(&f3, &f3.element(2).unwrap()).unwrap().is_none());
    }

    #[test]
    fn residual_matches_system() {
        let f = gf(5);
        let u = f.element(11).unwrap();
        let d = Delta3::from_bits(&f, 3, 17, 30).unwrap();
        let p = Point3::from_bits(&f, 9, 1, 22).unwrap();
        let r = diff_residual(&u, &d, &p).unwrap();
        assert_eq!(r.bits(), system_residual_raw(&f, 11, d.bits(), p.bits()));
        let zero = Delta3::from_bits(&f, 0, 0, 0).unwrap();
        assert_eq!(diff_residual(&u, &zero, &p).unwrap().bits(), [0, 0, 0]);
    }

    #[test]
    fn witness_json_shape() {
        let f = gf(5);
        let w = seventh_power_witness(&f, &f.element(2).unwrap()).unwrap();
        let j = w.to_json();
        assert_eq!(j["m"], 5);
        assert_eq!(j["modulus"], "0x25");
        assert_eq!(j["verified"], true);
        assert_eq!(j["point"].as_array().unwrap().len(), 3);
    }
}
