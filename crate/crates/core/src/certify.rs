//! Certificate polynomials and the exact identities they satisfy.
//!
//! The polynomials live as text files in a data directory (see
//! [`load_certificates`]). Every check returns a [`VerificationReport`]; a check
//! fails by reporting, never by returning an error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field2m::{FieldSpec, make_field};
use crate::mpoly::{
    parse_poly_file, randomized_coprimality, refutes_divisibility, MPoly, MPolyError, Monomial, Var,
    DEFAULT_PROBE_EXT_DEGREE, DEFAULT_PROBE_SEED, DEFAULT_PROBE_TRIALS, NVARS,
};
use crate::upoly;

pub const A_COUNT: usize = 22;
/// Indices i with a_i identically zero.
pub const ZERO_A: [usize; 4] = [13, 17, 19, 20];
pub const S_DEGREE: u32 = 24;
pub const S_X_DEGREE: u32 = 21;
pub const MANIFEST: &str = "manifest.txt";

const BXYZ: [Var; 4] = [Var::Be, Var::X, Var::Y, Var::Z];

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("{file}: {detail}")]
    Parse { file: String, detail: String },
    #[error("structural violation: {0}")]
    StructuralViolation(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("checksum mismatch for {file}")]
    ChecksumMismatch { file: String },
    #[error(transparent)]
    MPoly(#[from] MPolyError),
}

/// Every file a data directory must provide, without the `.poly` suffix.
pub fn certificate_names() -> Vec<String> {
    let mut names: Vec<String> = ["f_num", "f_den", "g", "h", "h_factor_long"].iter().map(|s| s.to_string()).collect();
    names.extend((0..A_COUNT).map(|i| format!("a{i:02}")));
    names
}

fn allowed_vars(name: &str) -> &'static [Var] {
    match name {
        "f_num" => &[Var::Al, Var::Be, Var::X, Var::Z, Var::U],
        "f_den" => &[Var::Be, Var::Y, Var::U],
        "g" | "h" | "h_factor_long" => &[Var::Be, Var::X, Var::Y, Var::Z, Var::U],
        _ => &[Var::Be, Var::Y, Var::Z, Var::U],
    }
}

/// Randomized probe parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeConfig {
    pub ext_degree: u32,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { ext_degree: DEFAULT_PROBE_EXT_DEGREE, trials: DEFAULT_PROBE_TRIALS, seed: DEFAULT_PROBE_SEED }
    }
}

/// The outcome of one check. It passes exactly when `detail` is empty.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub name: String,
    detail: Vec<String>,
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub elapsed: Duration,
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("VerificationReport", 5)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("status", self.status())?;
        st.serialize_field("detail", &self.detail)?;
        st.serialize_field("notes", &self.notes)?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

impl VerificationReport {
    fn new(name: &str) -> Self {
        VerificationReport { name: name.to_string(), detail: Vec::new(), notes: Vec::new(), seed: None, elapsed: Duration::ZERO }
    }

    pub fn passed(&self) -> bool {
        self.detail.is_empty()
    }

    pub fn status(&self) -> &'static str {
        if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn detail(&self) -> &[String] {
        &self.detail
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.detail.push(msg.into());
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn timed(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed();
        self
    }
}

/// Lists up to a few monomials of a nonzero residual.
fn residual_summary(r: &MPoly) -> String {
    let shown: Vec<String> = r.monomials().iter().rev().take(6).map(|m| m.to_string()).collect();
    let more = if r.len() > shown.len() { format!(" + ... ({} monomials)", r.len()) } else { String::new() };
    format!("{}{}", shown.join(" + "), more)
}

fn v(var: Var) -> MPoly {
    MPoly::var(var)
}

fn sum(parts: &[MPoly]) -> MPoly {
    parts.iter().fold(MPoly::zero(), |acc, p| acc.add(p))
}

fn prod(parts: &[&MPoly]) -> MPoly {
    parts.iter().fold(MPoly::one(), |acc, p| acc.mul(p).expect("small degrees"))
}

/// The components of `C_u(X+al, Y+be, Z+ga) + C_u(X, Y, Z)`, built from the map itself.
pub fn difference_polynomials() -> [MPoly; 3] {
    let (x, y, z, u) = (v(Var::X), v(Var::Y), v(Var::Z), v(Var::U));
    let (xs, ys, zs) = (x.add(&v(Var::Al)), y.add(&v(Var::Be)), z.add(&v(Var::Ga)));
    let cu = |x: &MPoly, y: &MPoly, z: &MPoly| -> [MPoly; 3] {
        [
            x.pow(3).unwrap().add(&prod(&[&u, &y.square().unwrap(), z])),
            y.pow(3).unwrap().add(&prod(&[&u, x, &z.square().unwrap()])),
            z.pow(3).unwrap().add(&prod(&[&u, &x.square().unwrap(), y])),
        ]
    };
    let (a, b) = (cu(&xs, &ys, &zs), cu(&x, &y, &z));
    [a[0].add(&b[0]), a[1].add(&b[1]), a[2].add(&b[2])]
}

/// The case-2 polynomials `A`, `B`, `C` after scaling `X` by `al` and `Y` by `be`.
pub fn case2_polynomials() -> [MPoly; 3] {
    let (al, be, x, y, z, u) = (v(Var::Al), v(Var::Be), v(Var::X), v(Var::Y), v(Var::Z), v(Var::U));
    let one = MPoly::one();
    let x_part = sum(&[x.square().unwrap(), x.clone(), one.clone()]);
    let y_part = sum(&[y.square().unwrap(), y.clone(), one.clone()]);
    let a = prod(&[&al.pow(3).unwrap(), &x_part]).add(&prod(&[&u, &be.square().unwrap(), &z]));
    let b = prod(&[&be.pow(3).unwrap(), &y_part]).add(&prod(&[&u, &al, &z.square().unwrap()]));
    let c = sum(&[x.square().unwrap(), y, one]);
    [a, b, c]
}

/// The transcribed certificate polynomials with the objects assembled from them.
#[derive(Clone, Debug)]
pub struct CertificateSet {
    pub num_f: MPoly,
    pub den_f: MPoly,
    pub g: MPoly,
    pub h: MPoly,
    pub h_factor_long: MPoly,
    pub a: Vec<MPoly>,
    /// `sum_i a_i X^i`.
    pub s: MPoly,
    /// The three difference polynomials in the unknowns `X, Y, Z, al, be, ga`.
    pub e: [MPoly; 3],
    h_cache: Arc<OnceLock<Result<MPoly, MPolyError>>>,
}

/// Reads and validates a certificate directory, checking the manifest digests.
pub fn load_certificates(dir: &Path) -> Result<CertificateSet, CertifyError> {
    let sources = read_sources(dir)?;
    verify_manifest(dir, &sources)?;
    CertificateSet::from_sources(&sources)
}

/// Like [`load_certificates`] but without consulting the manifest.
pub fn load_certificates_unchecked(dir: &Path) -> Result<CertificateSet, CertifyError> {
    CertificateSet::from_sources(&read_sources(dir)?)
}

fn read_sources(dir: &Path) -> Result<BTreeMap<String, String>, CertifyError> {
    let mut out = BTreeMap::new();
    for name in certificate_names() {
        let path = dir.join(format!("{name}.poly"));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CertifyError::Parse { file: path.display().to_string(), detail: e.to_string() })?;
        out.insert(name, text);
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Manifest text for a set of sources.
pub fn manifest_for(sources: &BTreeMap<String, String>) -> String {
    sources.iter().map(|(name, text)| format!("{name}.poly {}\n", sha256_hex(text.as_bytes()))).collect()
}

/// Rewrites the manifest of `dir` from the files currently present.
pub fn write_manifest(dir: &Path) -> Result<(), CertifyError> {
    let sources = read_sources(dir)?;
    std::fs::write(dir.join(MANIFEST), manifest_for(&sources)).map_err(|e| CertifyError::Manifest(e.to_string()))
}

fn verify_manifest(dir: &Path, sources: &BTreeMap<String, String>) -> Result<(), CertifyError> {
    let path: PathBuf = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| CertifyError::Manifest(format!("{}: {e}", path.display())))?;
    let mut listed = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (file, digest) = line
            .split_once(' ')
            .ok_or_else(|| CertifyError::Manifest(format!("line {}: expected '<file> <sha256>'", i + 1)))?;
        listed.insert(file.trim_end_matches(".poly").to_string(), digest.trim().to_string());
    }
    for (name, text) in sources {
        match listed.get(name) {
            None => return Err(CertifyError::Manifest(format!("{name}.poly not listed"))),
            Some(d) if *d != sha256_hex(text.as_bytes()) => {
                return Err(CertifyError::ChecksumMismatch { file: format!("{name}.poly") })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

impl CertificateSet {
    fn from_sources(sources: &BTreeMap<String, String>) -> Result<CertificateSet, CertifyError> {
        let mut polys = BTreeMap::new();
        for (name, text) in sources {
            let file = parse_poly_file(text).map_err(|e| CertifyError::Parse { file: format!("{name}.poly"), detail: e.to_string() })?;
            if file.name != *name {
                return Err(CertifyError::Parse {
                    file: format!("{name}.poly"),
                    detail: format!("declares polynomial '{}'", file.name),
                });
            }
            polys.insert(name.clone(), file.poly);
        }
        CertificateSet::from_polys(polys)
    }

    /// Assembles a set from named polynomials, checking the structural invariants.
    pub fn from_polys(mut polys: BTreeMap<String, MPoly>) -> Result<CertificateSet, CertifyError> {
        for name in certificate_names() {
            let p = polys.get(&name).ok_or_else(|| CertifyError::StructuralViolation(format!("{name} missing")))?;
            let allowed = allowed_vars(&name);
            if let Some(bad) = p.variables().into_iter().find(|v| !allowed.contains(v)) {
                return Err(CertifyError::StructuralViolation(format!("{name} involves {bad}")));
            }
        }
        let mut take = |n: &str| polys.remove(n).expect("checked above");
        let (num_f, den_f, g, h, h_factor_long) = (take("f_num"), take("f_den"), take("g"), take("h"), take("h_factor_long"));
        let a: Vec<MPoly> = (0..A_COUNT).map(|i| take(&format!("a{i:02}"))).collect();
        for i in ZERO_A {
            if !a[i].is_zero() {
                return Err(CertifyError::StructuralViolation(format!("a{i:02} is not zero")));
            }
        }
        let s = MPoly::from_coefficients(Var::X, &a)?;
        match s.homogeneous_degree(&BXYZ) {
            Ok(Some(S_DEGREE)) => {}
            Ok(Some(d)) => return Err(CertifyError::StructuralViolation(format!("S is homogeneous of degree {d}, not {S_DEGREE}"))),
            Ok(None) => return Err(CertifyError::StructuralViolation("S is not homogeneous in be, X, Y, Z".into())),
            Err(_) => return Err(CertifyError::StructuralViolation("S is zero".into())),
        }
        Ok(CertificateSet { num_f, den_f, g, h, h_factor_long, a, s, e: difference_polynomials(), h_cache: Arc::default() })
    }

    pub fn get(&self, name: &str) -> Option<&MPoly> {
        match name {
            "f_num" => Some(&self.num_f),
            "f_den" => Some(&self.den_f),
            "g" => Some(&self.g),
            "h" => Some(&self.h),
            "h_factor_long" => Some(&self.h_factor_long),
            _ => name.strip_prefix('a').and_then(|i| i.parse::<usize>().ok()).and_then(|i| self.a.get(i)),
        }
    }

    pub fn to_polys(&self) -> BTreeMap<String, MPoly> {
        certificate_names().into_iter().map(|n| (n.clone(), self.get(&n).expect("known name").clone())).collect()
    }

    /// A copy with one polynomial replaced. The cached eliminant is kept when it
    /// does not depend on the replaced polynomial.
    pub fn with_replaced(&self, name: &str, poly: MPoly) -> Result<CertificateSet, CertifyError> {
        let mut polys = self.to_polys();
        if !polys.contains_key(name) {
            return Err(CertifyError::StructuralViolation(format!("unknown certificate {name}")));
        }
        polys.insert(name.to_string(), poly);
        let mut out = CertificateSet::from_polys(polys)?;
        if !matches!(name, "f_num" | "f_den" | "g" | "h") {
            out.h_cache = Arc::clone(&self.h_cache);
        }
        Ok(out)
    }

    /// Evaluates `a`, `c` from the certificates at `(b, x, y, z)`; `None` off the guard.
    pub fn theta_solution(&self, field: &FieldSpec, b: u64, x: u64, y: u64, z: u64, u: u64) -> Option<(u64, u64)> {
        let mut vals = [0u64; NVARS];
        vals[Var::Be.index()] = b;
        vals[Var::X.index()] = x;
        vals[Var::Y.index()] = y;
        vals[Var::Z.index()] = z;
        vals[Var::U.index()] = u;
        let hv = self.h.eval_raw(field, &vals);
        if hv == 0 || b == y {
            return None;
        }
        let a = field.mul(self.g.eval_raw(field, &vals), field.inv(hv).ok()?);
        vals[Var::Al.index()] = a;
        let den = self.den_f.eval_raw(field, &vals);
        let c = field.mul(self.num_f.eval_raw(field, &vals), field.inv(den).ok()?);
        Some((a, c))
    }

    /// The eliminant `H`, built on first use and shared by clones.
    pub fn h_eliminant(&self) -> Result<&MPoly, CertifyError> {
        self.h_cache.get_or_init(|| build_h(self)).as_ref().map_err(|e| CertifyError::MPoly(e.clone()))
    }
}

// ---------------------------------------------------------------------------
// Checks.

/// `E1 = ga * f_den + f_num`, exactly.
pub fn verify_e1_identity(c: &CertificateSet) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("e1_identity");
    let residual = c.e[0].add(&c.den_f.mul(&v(Var::Ga)).expect("small")).add(&c.num_f);
    if !residual.is_zero() {
        r.fail(format!("E1 + ga*f_den + f_num = {}", residual_summary(&residual)));
    }
    r.timed(start)
}

/// `h = u^5 (be + Y)^2 * h_factor_long`, exactly.
pub fn verify_h_factored_form(c: &CertificateSet) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("h_factored_form");
    let bey2 = v(Var::Be).add(&v(Var::Y)).square().expect("small");
    let u5 = MPoly::from_monomial(Monomial::var(Var::U, 5).expect("small"));
    let product = prod(&[&u5, &bey2, &c.h_factor_long]);
    let residual = product.add(&c.h);
    if !residual.is_zero() {
        r.fail(format!("u^5 (be+Y)^2 * long factor + h = {}", residual_summary(&residual)));
    }
    match (c.h.var_valuation(Var::U), product.var_valuation(Var::U)) {
        (Ok(a), Ok(b)) if a == b => r.note(format!("u-valuation of h: {a}")),
        (a, b) => r.fail(format!("u-valuation of h {a:?} differs from the product's {b:?}")),
    }
    r.timed(start)
}

/// `al A^2 + u be^4 B + al^7 (C^2 + C) = (al^7 + u be^7)(Y^2 + Y + 1)`, plus a numeric spot check.
pub fn verify_case2_identity(probe: ProbeConfig) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("case2_identity");
    let [a, b, cc] = case2_polynomials();
    let (al, be, y, u) = (v(Var::Al), v(Var::Be), v(Var::Y), v(Var::U));
    let lhs = sum(&[
        prod(&[&al, &a.square().unwrap()]),
        prod(&[&u, &be.pow(4).unwrap(), &b]),
        prod(&[&al.pow(7).unwrap(), &cc.square().unwrap().add(&cc)]),
    ]);
    let rhs = prod(&[&al.pow(7).unwrap().add(&prod(&[&u, &be.pow(7).unwrap()])), &sum(&[y.square().unwrap(), y, MPoly::one()])]);
    let residual = lhs.add(&rhs);
    if !residual.is_zero() {
        r.fail(format!("identity residual {}", residual_summary(&residual)));
    }
    r.seed = Some(probe.seed);
    match case2_spot_check(&a, &rhs, probe) {
        Ok(n) => r.note(format!("numeric spot check on {n} points of C = B = 0 over GF(2^13)")),
        Err(msg) => r.fail(msg),
    }
    r.timed(start)
}

fn case2_spot_check(a: &MPoly, rhs: &MPoly, probe: ProbeConfig) -> Result<usize, String> {
    let field = make_field(13, None).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let mut nonzero = || loop {
        let x = rng.gen::<u64>() & field.mask();
        if x != 0 {
            break x;
        }
    };
    for _ in 0..probe.trials {
        let (al, be, x, u) = (nonzero(), nonzero(), nonzero(), nonzero());
        // C = 0 gives Y, B = 0 gives Z^2
        let y = field.square(x) ^ 1;
        let ypart = field.square(y) ^ y ^ 1;
        let z2 = field.mul(field.mul(field.pow(be, 3), ypart), field.inv(field.mul(u, al)).expect("nonzero"));
        let mut vals = [0u64; NVARS];
        vals[Var::Al.index()] = al;
        vals[Var::Be.index()] = be;
        vals[Var::X.index()] = x;
        vals[Var::Y.index()] = y;
        vals[Var::Z.index()] = field.sqrt(z2);
        vals[Var::U.index()] = u;
        let lhs = field.mul(al, field.square(a.eval_raw(&field, &vals)));
        if lhs != rhs.eval_raw(&field, &vals) {
            return Err(format!("spot check failed at al={al:#x} be={be:#x} X={x:#x} u={u:#x}"));
        }
    }
    Ok(probe.trials)
}

/// The six structural facts about `S`, `a_0` and `h` on the plane `X = 0`.
pub fn verify_prop3_structure(c: &CertificateSet, probe: ProbeConfig) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("prop3_structure");
    r.seed = Some(probe.seed);
    match c.s.homogeneous_degree(&BXYZ) {
        Ok(Some(S_DEGREE)) => {}
        other => r.fail(format!("degree: S homogeneous degree {other:?}, expected {S_DEGREE}")),
    }
    if c.s.degree_in(Var::X) != Some(S_X_DEGREE) {
        r.fail(format!("degree: X-degree of S is {:?}, expected {S_X_DEGREE}", c.s.degree_in(Var::X)));
    }
    match c.s.var_valuation(Var::Be) {
        Ok(0) => {}
        other => r.fail(format!("valuation: be-valuation of S is {other:?}, expected 0")),
    }
    match c.a[0].var_valuation(Var::Be) {
        Ok(1) => {}
        other => r.fail(format!("a00 valuation: be-valuation of a00 is {other:?}, expected 1")),
    }
    let slice = c.s.set_zero(Var::X);
    if slice != c.a[0] {
        r.fail(format!("slice: S at X = 0 differs from a00 by {}", residual_summary(&slice.add(&c.a[0]))));
    }
    let plane = v(Var::Be).add(&v(Var::Y)).mul(&c.h).expect("small").set_zero(Var::X);
    let expected = plane_polynomial();
    if plane != expected {
        r.fail(format!("plane: (be+Y) h at X = 0 differs from the displayed product by {}", residual_summary(&plane.add(&expected))));
    }
    match randomized_coprimality(&c.a[0], &plane, Var::Z, probe.ext_degree, probe.trials, probe.seed) {
        Ok(true) => r.note(format!("coprimality: coprime in Z over GF(2^{})", probe.ext_degree)),
        Ok(false) => r.fail("coprimality: no trial separated a00 from (be+Y) h at X = 0"),
        Err(e) => r.fail(format!("coprimality: {e}")),
    }
    r.timed(start)
}

/// `u^5 Z^2 (be+Y)^3 ((u^2+u^5)(be^3 Y^4 + be^2 Y^5 + be Y^6) + u^5 Y^7 + Z^7)`.
pub fn plane_polynomial() -> MPoly {
    let p = |s: &str| MPoly::parse(s).expect("literal");
    let inner = p("u^2 be^3 Y^4 + u^5 be^3 Y^4 + u^2 be^2 Y^5 + u^5 be^2 Y^5 + u^2 be Y^6 + u^5 be Y^6 + u^5 Y^7 + Z^7");
    prod(&[&p("u^5 Z^2"), &p("be + Y").pow(3).unwrap(), &inner])
}

/// `P = f_den^2 E2(ga := f_num / f_den)`.
pub fn alpha_polynomial(c: &CertificateSet) -> Result<MPoly, MPolyError> {
    c.e[1].substitute(Var::Ga, &c.num_f, &c.den_f, 2)
}

/// Expected `al`-degree of `P`: `al ga^2` contributes `al * f_num^2`.
pub const P_AL_DEGREE: u32 = 7;

/// Checks that `al = g / h` on the relevant locus.
///
/// Levels, strongest first: `h al + g` divides `P`; `S` divides `h^7 P(g/h)`;
/// `g / h` is a root of `P` modulo `S` on random specializations of `be, Y, Z, u`.
/// The randomized level only runs when the exact computation is unavailable.
pub fn verify_alpha_elimination(c: &CertificateSet, probe: ProbeConfig) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("alpha_elimination");
    r.seed = Some(probe.seed);
    let p = match alpha_polynomial(c) {
        Ok(p) => p,
        Err(e) => {
            r.fail(e.to_string());
            return r.timed(start);
        }
    };
    if p.degree_in(Var::Al) != Some(P_AL_DEGREE) {
        r.fail(format!("al-degree of P is {:?}, expected {P_AL_DEGREE}", p.degree_in(Var::Al)));
    }
    let d = c.h.mul(&v(Var::Al)).expect("small").add(&c.g);
    let refuted = refutes_divisibility(&d, &p, Var::X, probe.ext_degree, 2, probe.seed).unwrap_or(false);
    if !refuted {
        match p.divide_exact(&d) {
            Ok(Some(q)) => {
                r.note(format!("level exact: h al + g divides P, quotient has {} monomials", q.len()));
                return r.timed(start);
            }
            Ok(None) => {}
            Err(e) => {
                r.fail(e.to_string());
                return r.timed(start);
            }
        }
    }
    r.note("h al + g does not divide P exactly");
    // h^7 P(g/h) lies in the ideal of S exactly when S divides it
    match p.substitute(Var::Al, &c.g, &c.h, P_AL_DEGREE) {
        Ok(root) => {
            if refutes_divisibility(&c.s, &root, Var::X, probe.ext_degree, 2, probe.seed).unwrap_or(false) {
                r.fail("h^7 P(g/h) is not a multiple of S");
                return r.timed(start);
            }
            match root.divide_exact(&c.s) {
                Ok(Some(q)) => {
                    r.note(format!("level exact modulo S: S divides h^7 P(g/h), quotient has {} monomials", q.len()));
                    return r.timed(start);
                }
                Ok(None) => {
                    r.fail("h^7 P(g/h) is not a multiple of S");
                    return r.timed(start);
                }
                Err(e) => r.note(format!("exact membership unavailable: {e}")),
            }
        }
        Err(e) => r.note(format!("exact membership unavailable: {e}")),
    }
    match root_modulo_s(c, &p, probe) {
        Ok(n) => r.note(format!("level randomized: g/h is a root of P modulo S on {n} specializations over GF(2^{})", probe.ext_degree)),
        Err(msg) => r.fail(msg),
    }
    r.timed(start)
}

/// Checks `sum_j P_j g^j h^(7-j) = 0 mod S` after specializing everything but `X`.
pub fn root_modulo_s(c: &CertificateSet, p: &MPoly, probe: ProbeConfig) -> Result<usize, String> {
    let field = FieldSpec::probe_field(probe.ext_degree).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed ^ 0xa1fa);
    let coeffs = p.coefficients_in(Var::Al);
    let top = coeffs.len() - 1;
    let mut done = 0;
    let mut attempts = 0;
    while done < probe.trials {
        attempts += 1;
        if attempts > 4 * probe.trials {
            return Err("too many degenerate specializations".into());
        }
        let vals: [u64; NVARS] = std::array::from_fn(|_| rng.gen::<u64>() & field.mask());
        let ss = c.s.specialize(&field, &vals, Var::X);
        if upoly::degree(&ss) != Some(S_X_DEGREE as usize) {
            continue;
        }
        let gs = upoly::rem(&field, &c.g.specialize(&field, &vals, Var::X), &ss);
        let hs = upoly::rem(&field, &c.h.specialize(&field, &vals, Var::X), &ss);
        // Horner in the ratio g/h, homogenized by h
        let mut acc: Vec<u64> = Vec::new();
        let mut hpow = vec![1u64];
        for (j, pj) in coeffs.iter().enumerate().rev() {
            acc = upoly::mul_mod(&field, &acc, &gs, &ss);
            let pj = upoly::rem(&field, &pj.specialize(&field, &vals, Var::X), &ss);
            if j < top {
                hpow = upoly::mul_mod(&field, &hpow, &hs, &ss);
            }
            // acc = acc * g + P_j * h^(top - j)
            upoly::add_assign(&mut acc, &upoly::mul_mod(&field, &pj, &hpow, &ss));
        }
        if !acc.is_empty() {
            return Err(format!("h^{top} P(g/h) is nonzero modulo S at trial {done}"));
        }
        done += 1;
    }
    Ok(done)
}

/// Builds `H`: the numerator of `E3` at `al = g/h`, `ga = f`, with denominators
/// cleared and then every removable factor of the clearing divided out again.
pub fn build_h(c: &CertificateSet) -> Result<MPoly, MPolyError> {
    let nf = c.num_f.substitute(Var::Al, &c.g, &c.h, 3)?;
    let df = c.h.pow(3)?.mul(&c.den_f)?;
    let t = c.e[2].substitute(Var::Ga, &nf, &df, 3)?;
    let mut hh = t.substitute(Var::Al, &c.g, &c.h, 2)?;
    let linear = v(Var::Be).add(&v(Var::Y));
    for factor in [&c.h_factor_long, &linear] {
        if factor.is_zero() || factor.len() == 1 {
            continue;
        }
        while let Some(q) = hh.divide_exact(factor)? {
            hh = q;
        }
    }
    Ok(hh.strip_content())
}

/// `S` divides `H`.
pub fn verify_h_divisibility(c: &CertificateSet, probe: ProbeConfig) -> VerificationReport {
    let start = Instant::now();
    let mut r = VerificationReport::new("h_divisibility");
    r.seed = Some(probe.seed);
    let hh = match c.h_eliminant() {
        Ok(h) => h,
        Err(e) => {
            r.fail(format!("building H: {e}"));
            return r.timed(start);
        }
    };
    if hh.is_zero() {
        r.fail("H is zero");
        return r.timed(start);
    }
    r.note(format!(
        "H has {} monomials, degree {:?} in be X Y Z, variables {}",
        hh.len(),
        hh.degree_in_vars(&BXYZ).unwrap_or(0),
        hh.variables().iter().map(|v| v.name()).collect::<Vec<_>>().join(" ")
    ));
    if refutes_divisibility(&c.s, hh, Var::X, probe.ext_degree, 2, probe.seed).unwrap_or(false) {
        r.fail("S does not divide H: a specialization leaves a nonzero remainder");
        return r.timed(start);
    }
    match hh.divide_exact(&c.s) {
        Ok(Some(q)) => r.note(format!(
            "quotient: {} monomials, X-degree {}, degree {} in be X Y Z",
            q.len(),
            q.degree_in(Var::X).unwrap_or(0),
            q.degree_in_vars(&BXYZ).unwrap_or(0)
        )),
        Ok(None) => r.fail("S does not divide H"),
        Err(e) => r.fail(e.to_string()),
    }
    r.timed(start)
}

/// Runs every check, cheapest first.
pub fn verify_all(c: &CertificateSet, probe: ProbeConfig) -> Vec<VerificationReport> {
    vec![
        verify_e1_identity(c),
        verify_h_factored_form(c),
        verify_case2_identity(probe),
        verify_prop3_structure(c, probe),
        verify_alpha_elimination(c, probe),
        verify_h_divisibility(c, probe),
    ]
}

/// Name of the first failing check, stopping early; `None` when all pass.
pub fn first_failure(c: &CertificateSet, probe: ProbeConfig) -> Option<String> {
    let checks: [&dyn Fn() -> VerificationReport; 5] = [
        &|| verify_e1_identity(c),
        &|| verify_h_factored_form(c),
        &|| verify_prop3_structure(c, probe),
        &|| verify_alpha_elimination(c, probe),
        &|| verify_h_divisibility(c, probe),
    ];
    checks.iter().map(|f| f()).find(|r| !r.passed()).map(|r| r.name)
}

/// Outcome of deleting one monomial from one certificate.
#[derive(Clone, Debug)]
pub struct Mutant {
    pub file: String,
    pub monomial: Monomial,
    /// The load error or failing check that detected the mutation.
    pub killed_by: Option<String>,
}

/// Deletes `monomial` from `file` and reports what detects it.
pub fn run_mutant(c: &CertificateSet, file: &str, monomial: Monomial, probe: ProbeConfig) -> Mutant {
    let killed_by = match c.get(file) {
        None => Some("unknown file".to_string()),
        Some(p) => match c.with_replaced(file, p.toggle(monomial)) {
            Err(e) => Some(format!("load: {e}")),
            Ok(m) => first_failure(&m, probe),
        },
    };
    Mutant { file: file.to_string(), monomial, killed_by }
}

/// Draws `count` distinct (file, monomial) pairs uniformly from all shipped monomials.
pub fn sample_monomials(c: &CertificateSet, count: usize, seed: u64) -> Vec<(String, Monomial)> {
    let all: Vec<(String, Monomial)> = certificate_names()
        .into_iter()
        .flat_map(|n| {
            let p = c.get(&n).expect("known").clone();
            p.monomials().iter().map(move |&m| (n.clone(), m)).collect::<Vec<_>>()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, all.len(), count.min(all.len())).into_iter().map(|i| all[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped() -> CertificateSet {
        load_certificates(&Path::new(env!("CARGO_MANIFEST_DIR")).join("certificates")).unwrap()
    }

    #[test]
    fn difference_polynomials_match_expanded_system() {
        let p = |s: &str| MPoly::parse(s).unwrap();
        let e = difference_polynomials();
        assert_eq!(e[0], p("al X^2 + al^2 X + al^3 + u ga Y^2 + u be^2 Z + u be^2 ga"));
        assert_eq!(e[1], p("be Y^2 + be^2 Y + be^3 + u ga^2 X + u al Z^2 + u al ga^2"));
        assert_eq!(e[2], p("ga Z^2 + ga^2 Z + ga^3 + u be X^2 + u al^2 Y + u al^2 be"));
    }

    #[test]
    fn shipped_set_loads() {
        let c = shipped();
        assert_eq!(c.s.degree_in(Var::X), Some(S_X_DEGREE));
        assert_eq!(c.a[0].degree_in(Var::U), Some(22));
        assert!(verify_e1_identity(&c).passed());
        assert!(verify_h_factored_form(&c).passed());
        assert!(verify_prop3_structure(&c, ProbeConfig::default()).passed());
    }

    #[test]
    fn case2_passes() {
        let r = verify_case2_identity(ProbeConfig::default());
        assert!(r.passed(), "{:?}", r.detail());
    }

    #[test]
    fn structural_violations() {
        let c = shipped();
        let err = c.with_replaced("a13", MPoly::parse("be Y^23").unwrap()).unwrap_err();
        assert!(matches!(err, CertifyError::StructuralViolation(_)));
        let err = c.with_replaced("a00", MPoly::parse("al be^24").unwrap()).unwrap_err();
        assert!(matches!(err, CertifyError::StructuralViolation(_)));
        let err = c.with_replaced("a21", c.a[21].add(&MPoly::parse("be^2").unwrap())).unwrap_err();
        assert!(matches!(err, CertifyError::StructuralViolation(_)));
    }

    #[test]
    fn planted_shared_factor_is_not_coprime() {
        let c = shipped();
        let q = c.a[0].mul(&v(Var::Be).add(&v(Var::Y))).unwrap();
        let p = ProbeConfig::default();
        assert!(!randomized_coprimality(&c.a[0], &q, Var::Z, p.ext_degree, p.trials, p.seed).unwrap());
    }

    #[test]
    fn local_mutations_are_caught() {
        let c = shipped();
        let p = ProbeConfig::default();
        let x2 = Monomial::from_exponents([1, 0, 0, 2, 0, 0, 0]).unwrap();
        assert_eq!(run_mutant(&c, "f_num", x2, p).killed_by.as_deref(), Some("e1_identity"));
        let z9 = *c.h_factor_long.monomials().iter().find(|m| m.degree(Var::Z) == 9).unwrap();
        assert_eq!(run_mutant(&c, "h_factor_long", z9, p).killed_by.as_deref(), Some("h_factored_form"));
        let free = Monomial::from_exponents([0, 0, 0, 0, 24, 0, 0]).unwrap();
        let mutated = c.with_replaced("a00", c.a[0].toggle(free)).unwrap();
        let r = verify_prop3_structure(&mutated, p);
        assert!(r.detail().iter().any(|d| d.starts_with("a00 valuation")));
    }

    #[test]
    fn missing_directory_is_a_parse_error() {
        let dir = std::env::temp_dir().join("cu-lab-empty-cert-dir");
        std::fs::create_dir_all(&dir).unwrap();
        assert!(matches!(load_certificates(&dir), Err(CertifyError::Parse { .. })));
    }
}
