//! Command-line front end shared by the `cu-lab` binary and the tests.
//!
//! [`run`] never prints; it returns the exit code together with a [`Report`]
//! and its human-readable rendering.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{self, CertifyError, ProbeConfig};
use crate::cu_analysis::{self, AnalysisError};
use crate::field2m::{make_field, FieldSpec, Fe};
use crate::lwbound::{self, BoundSign};
use crate::mpoly::DEFAULT_PROBE_SEED;

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/certificates");

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "cu-lab", version, about = "Permutation, differential and certificate checks for C_u over GF(2^m)^3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized probes and sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_PROBE_SEED)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Extension degree.
    #[arg(long)]
    pub m: u32,
    /// Irreducible modulus in hex, e.g. 0x203; defaults to the lowest-weight one.
    #[arg(long)]
    pub modulus: Option<String>,
}

#[derive(Args, Debug, Clone)]
#[group(id = "which_u", required = true, multiple = false, args = ["u", "all_u"])]
pub struct UArgs {
    /// Parameter as "hex:0x..." or "gen^k".
    #[arg(long)]
    pub u: Option<String>,
    /// Every u in the field.
    #[arg(long)]
    pub all_u: bool,
}

#[derive(ClapSubcommand, Debug)]
pub enum Command {
    /// Describe a field: modulus, generator, 7th powers.
    FieldInfo(FieldArgs),
    /// Exhaustive permutation test.
    Permutation {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        u: UArgs,
    },
    /// Differential uniformity.
    Ddt {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        u: UArgs,
        /// Stop at the first count above 2.
        #[arg(long)]
        early_exit: bool,
    },
    /// Constructive collision witnesses.
    Collision {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        u: UArgs,
    },
    /// Check the certificate identities.
    VerifyCertificates {
        #[arg(long, env = "CU_LAB_DATA", default_value = DEFAULT_DATA_DIR)]
        data: PathBuf,
        /// Also run this many single-monomial deletion mutants.
        #[arg(long, default_value_t = 0)]
        mutants: usize,
    },
    /// Enumerate the certified solution set and check every tuple.
    ThetaScan {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        u: UArgs,
        #[arg(long, env = "CU_LAB_DATA", default_value = DEFAULT_DATA_DIR)]
        data: PathBuf,
    },
    /// Exact evaluation of the point-count bound.
    Bound {
        /// A single m; without it, every m in 1..=64.
        #[arg(long, conflicts_with = "find_threshold")]
        m: Option<u32>,
        /// Report the smallest odd m with a positive bound.
        #[arg(long)]
        find_threshold: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    FieldInfo,
    Permutation,
    Ddt,
    Collision,
    VerifyCertificates,
    ThetaScan,
    Bound,
}

/// A validated invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub m: Option<u32>,
    pub modulus: Option<String>,
    pub u: Option<String>,
    pub all_u: bool,
    pub early_exit: bool,
    pub find_threshold: bool,
    pub mutants: usize,
    pub data_dir: PathBuf,
    pub json: bool,
    pub timing: bool,
    pub seed: u64,
    pub threads: usize,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> RunConfig {
        let mut cfg = RunConfig {
            subcommand: Subcommand::Bound,
            m: None,
            modulus: None,
            u: None,
            all_u: false,
            early_exit: false,
            find_threshold: false,
            mutants: 0,
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            json: cli.json,
            timing: cli.timing,
            seed: cli.seed,
            threads: cli.threads,
        };
        let set_field = |cfg: &mut RunConfig, f: FieldArgs, u: Option<UArgs>| {
            cfg.m = Some(f.m);
            cfg.modulus = f.modulus;
            if let Some(u) = u {
                cfg.u = u.u;
                cfg.all_u = u.all_u;
            }
        };
        match cli.command {
            Command::FieldInfo(f) => {
                cfg.subcommand = Subcommand::FieldInfo;
                set_field(&mut cfg, f, None);
            }
            Command::Permutation { field, u } => {
                cfg.subcommand = Subcommand::Permutation;
                set_field(&mut cfg, field, Some(u));
            }
            Command::Ddt { field, u, early_exit } => {
                cfg.subcommand = Subcommand::Ddt;
                cfg.early_exit = early_exit;
                set_field(&mut cfg, field, Some(u));
            }
            Command::Collision { field, u } => {
                cfg.subcommand = Subcommand::Collision;
                set_field(&mut cfg, field, Some(u));
            }
            Command::VerifyCertificates { data, mutants } => {
                cfg.subcommand = Subcommand::VerifyCertificates;
                cfg.data_dir = data;
                cfg.mutants = mutants;
            }
            Command::ThetaScan { field, u, data } => {
                cfg.subcommand = Subcommand::ThetaScan;
                cfg.data_dir = data;
                set_field(&mut cfg, field, Some(u));
            }
            Command::Bound { m, find_threshold } => {
                cfg.subcommand = Subcommand::Bound;
                cfg.m = m;
                cfg.find_threshold = find_threshold;
            }
        }
        cfg
    }
}

impl RunConfig {
    /// Parses command-line arguments (including the program name).
    pub fn parse_from<I, T>(args: I) -> Result<RunConfig, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Cli::try_parse_from(args).map(RunConfig::from)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: RunConfig,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub seed: u64,
}

/// Result of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: u8,
    pub report: Option<Report>,
    /// Human-readable rendering, or JSON when requested.
    pub stdout: String,
    pub stderr: String,
}

/// Parses a u specification against a field.
pub fn parse_u(field: &FieldSpec, spec: &str) -> Result<Fe, String> {
    if let Some(h) = spec.strip_prefix("hex:") {
        let digits = h.strip_prefix("0x").or_else(|| h.strip_prefix("0X")).unwrap_or(h);
        let bits = u64::from_str_radix(digits, 16).map_err(|e| format!("bad hex value '{h}': {e}"))?;
        return field.element(bits).map_err(|e| e.to_string());
    }
    if let Some(k) = spec.strip_prefix("gen^") {
        let k: u128 = k.parse().map_err(|e| format!("bad exponent '{k}': {e}"))?;
        return Ok(field.element(field.generator()).expect("generator").pow(k));
    }
    Err(format!("u must be 'hex:0x...' or 'gen^k', got '{spec}'"))
}

fn parse_modulus(text: &str) -> Result<u128, String> {
    let digits = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")).unwrap_or(text);
    u128::from_str_radix(digits, 16).map_err(|e| format!("bad modulus '{text}': {e}"))
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Failure {
        match e {
            AnalysisError::ThetaViolation(_) => Failure { code: EXIT_FAILED, message: e.to_string() },
            _ => usage(e.to_string()),
        }
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Failure {
        let code = match e {
            CertifyError::StructuralViolation(_) | CertifyError::ChecksumMismatch { .. } => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Payload, rendered text, and whether every check passed.
struct Computed {
    results: Value,
    text: String,
    ok: bool,
}

fn field_of(cfg: &RunConfig) -> Result<FieldSpec, Failure> {
    let m = cfg.m.ok_or_else(|| usage("--m is required"))?;
    let modulus = cfg.modulus.as_deref().map(parse_modulus).transpose().map_err(usage)?;
    make_field(m, modulus).map_err(|e| usage(e.to_string()))
}

fn u_values(cfg: &RunConfig, field: &FieldSpec) -> Result<Vec<Fe>, Failure> {
    match (&cfg.u, cfg.all_u) {
        (Some(spec), false) => Ok(vec![parse_u(field, spec).map_err(usage)?]),
        (None, true) => Ok(field.elements().map(|b| field.element(b).expect("in range")).collect()),
        _ => Err(usage("give exactly one of --u and --all-u")),
    }
}

fn hex(b: u64) -> String {
    format!("{b:#x}")
}

/// Runs one invocation.
pub fn run(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => return Outcome { code: EXIT_USAGE, report: None, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let computed = pool.install(|| dispatch(cfg));
    match computed {
        Err(f) => Outcome { code: f.code, report: None, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
        Ok(c) => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                command: cfg.clone(),
                results: c.results,
                timing_ms: cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
                seed: cfg.seed,
            };
            let stdout = if cfg.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else if let Some(ms) = report.timing_ms {
                format!("{}elapsed: {ms:.1} ms\n", c.text)
            } else {
                c.text
            };
            Outcome { code: if c.ok { EXIT_OK } else { EXIT_FAILED }, report: Some(report), stdout, stderr: String::new() }
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Computed, Failure> {
    match cfg.subcommand {
        Subcommand::FieldInfo => field_info(cfg),
        Subcommand::Permutation => permutation(cfg),
        Subcommand::Ddt => ddt(cfg),
        Subcommand::Collision => collision(cfg),
        Subcommand::VerifyCertificates => verify_certificates(cfg),
        Subcommand::ThetaScan => theta_scan(cfg),
        Subcommand::Bound => bound(cfg),
    }
}

fn field_info(cfg: &RunConfig) -> Result<Computed, Failure> {
    let f = field_of(cfg)?;
    let order = f.mask();
    let sevenths = if order % 7 == 0 { order / 7 } else { order };
    let results = json!({
        "m": f.m(),
        "modulus": format!("{:#x}", f.modulus()),
        "q": f.q().to_string(),
        "generator": hex(f.generator()),
        "seven_divides_q_minus_1": order % 7 == 0,
        "nonzero_seventh_powers": sevenths,
    });
    let text = format!(
        "GF(2^{}) modulo {:#x}\nq = {}\nsmallest generator: {}\nnonzero 7th powers: {} of {}\n",
        f.m(),
        f.modulus(),
        f.q(),
        hex(f.generator()),
        sevenths,
        order
    );
    Ok(Computed { results, text, ok: true })
}

fn permutation(cfg: &RunConfig) -> Result<Computed, Failure> {
    let f = field_of(cfg)?;
    let mut rows = Vec::new();
    let mut text = format!("C_u permutation test over GF(2^{}) mod {:#x}\n", f.m(), f.modulus());
    let mut ok = true;
    for u in u_values(cfg, &f)? {
        if u.is_zero() {
            rows.push(json!({"u": hex(0), "result": "invalid"}));
            let _ = writeln!(text, "u = {:>8}  invalid (u = 0)", "0x0");
            continue;
        }
        let (perm, w) = cu_analysis::is_permutation(&f, &u)?;
        ok &= w.as_ref().is_none_or(|w| w.verified);
        // Odd m below the proven range with u outside the 7th powers: only the scan speaks for the conjecture.
        let unproven = f.m() % 2 == 1 && f.m() > 3 && u.is_seventh_power().is_ok_and(|s| !s);
        let label = (!perm && unproven).then_some("conjecture-consistent");
        let mut row = json!({
            "u": hex(u.bits()),
            "result": if perm { "permutation" } else { "not-permutation" },
            "witness": w.as_ref().map(|w| w.to_json()),
        });
        if let Some(l) = label {
            row["label"] = json!(l);
        }
        rows.push(row);
        let detail = w.map(|w| format!("  p = {:?}, delta = {:?}", w.point.bits(), w.delta.bits())).unwrap_or_default();
        let label = label.map(|l| format!("  ({l})")).unwrap_or_default();
        let _ = writeln!(text, "u = {:>8}  {}{detail}{label}", hex(u.bits()), if perm { "permutation" } else { "not a permutation" });
    }
    Ok(Computed { results: json!({"m": f.m(), "modulus": format!("{:#x}", f.modulus()), "rows": rows}), text, ok })
}

fn ddt(cfg: &RunConfig) -> Result<Computed, Failure> {
    let f = field_of(cfg)?;
    let threshold = cfg.early_exit.then_some(2);
    let mut rows = Vec::new();
    let mut text = format!(
        "differential uniformity over GF(2^{}) mod {:#x}{}\n",
        f.m(),
        f.modulus(),
        if cfg.early_exit { " (stop at first count > 2)" } else { "" }
    );
    for u in u_values(cfg, &f)? {
        if u.is_zero() && cfg.early_exit {
            rows.push(json!({"u": hex(0), "result": "invalid"}));
            let _ = writeln!(text, "u = {:>8}  invalid with --early-exit", "0x0");
            continue;
        }
        let r = cu_analysis::differential_uniformity(&f, &u, threshold)?;
        let _ = writeln!(
            text,
            "u = {:>8}  uniformity {}{}  direction {:?} output {:?}",
            hex(u.bits()),
            if r.exhaustive { "" } else { ">= " },
            r.uniformity,
            r.witness_direction.bits(),
            r.witness_output.bits()
        );
        rows.push(r.to_json());
    }
    Ok(Computed { results: json!({"m": f.m(), "modulus": format!("{:#x}", f.modulus()), "rows": rows}), text, ok: true })
}

fn collision(cfg: &RunConfig) -> Result<Computed, Failure> {
    let f = field_of(cfg)?;
    let mut rows = Vec::new();
    let mut text = format!("collision witnesses over GF(2^{}) mod {:#x}\n", f.m(), f.modulus());
    let mut ok = true;
    for u in u_values(cfg, &f)? {
        if u.is_zero() {
            rows.push(json!({"u": hex(0), "result": "invalid"}));
            let _ = writeln!(text, "u = {:>8}  invalid (u = 0)", "0x0");
            continue;
        }
        match cu_analysis::nonpermutation_witness(&f, &u)? {
            None => {
                rows.push(json!({"u": hex(u.bits()), "result": "permutation"}));
                let _ = writeln!(text, "u = {:>8}  permutation, no witness", hex(u.bits()));
            }
            Some((route, w)) => {
                ok &= w.verified && w.recheck();
                let mut j = w.to_json();
                j["route"] = json!(route);
                rows.push(j);
                let _ = writeln!(
                    text,
                    "u = {:>8}  {:<13} p = {:?}, delta = {:?}, verified = {}",
                    hex(u.bits()),
                    serde_json::to_value(route).expect("route").as_str().unwrap_or(""),
                    w.point.bits(),
                    w.delta.bits(),
                    w.verified
                );
            }
        }
    }
    Ok(Computed { results: json!({"m": f.m(), "modulus": format!("{:#x}", f.modulus()), "rows": rows}), text, ok })
}

fn verify_certificates(cfg: &RunConfig) -> Result<Computed, Failure> {
    let certs = certify::load_certificates(&cfg.data_dir)?;
    let probe = ProbeConfig { seed: cfg.seed, ..ProbeConfig::default() };
    let reports = certify::verify_all(&certs, probe);
    let mut ok = reports.iter().all(|r| r.passed());
    let mut text = String::new();
    for r in &reports {
        let _ = writeln!(text, "{:<18} {}", r.name, r.status());
        for d in r.detail() {
            let _ = writeln!(text, "    fail: {d}");
        }
        for n in &r.notes {
            let _ = writeln!(text, "    {n}");
        }
    }
    let mut results = json!({ "checks": reports });
    if cfg.mutants > 0 {
        let sample = certify::sample_monomials(&certs, cfg.mutants, cfg.seed);
        let mutants: Vec<_> = sample.iter().map(|(file, mono)| certify::run_mutant(&certs, file, *mono, probe)).collect();
        let killed = mutants.iter().filter(|m| m.killed_by.is_some()).count();
        ok &= killed == mutants.len();
        let _ = writeln!(text, "mutants: {killed} of {} detected", mutants.len());
        for m in mutants.iter().filter(|m| m.killed_by.is_none()) {
            let _ = writeln!(text, "    survived: {} without {}", m.file, m.monomial);
        }
        results["mutants"] = json!(mutants
            .iter()
            .map(|m| json!({"file": m.file, "monomial": m.monomial.to_string(), "killed_by": m.killed_by}))
            .collect::<Vec<_>>());
    }
    Ok(Computed { results, text, ok })
}

fn theta_scan(cfg: &RunConfig) -> Result<Computed, Failure> {
    let f = field_of(cfg)?;
    let certs = certify::load_certificates(&cfg.data_dir)?;
    let mut rows = Vec::new();
    let mut text = format!("solution-set enumeration over GF(2^{}) mod {:#x}\n", f.m(), f.modulus());
    for u in u_values(cfg, &f)? {
        let tuples = cu_analysis::theta_scan(&f, &u, &certs)?;
        let nontrivial = tuples.iter().filter(|t| !t.is_trivial()).count();
        let _ = writeln!(text, "u = {:>8}  {} tuples ({nontrivial} nontrivial), 0 violations", hex(u.bits()), tuples.len());
        rows.push(json!({"u": hex(u.bits()), "tuples": tuples.len(), "nontrivial": nontrivial, "violations": 0}));
    }
    Ok(Computed { results: json!({"m": f.m(), "modulus": format!("{:#x}", f.modulus()), "rows": rows}), text, ok: true })
}

fn bound(cfg: &RunConfig) -> Result<Computed, Failure> {
    if cfg.find_threshold {
        return match lwbound::find_min_odd_m() {
            Ok(m) => Ok(Computed {
                results: json!({"threshold": m, "first_applicable_m": lwbound::first_applicable_m(3, 27)}),
                text: format!("smallest odd m with a positive bound: {m}\n"),
                ok: true,
            }),
            Err(e) => Ok(Computed { results: json!({"error": e.to_string()}), text: format!("threshold search failed: {e}\n"), ok: false }),
        };
    }
    let ms: Vec<u32> = match cfg.m {
        Some(m) => vec![m],
        None => (1..=64).collect(),
    };
    let mut reports = Vec::new();
    let mut text = String::from("  m  sign      applicable  estimate\n");
    for m in ms {
        let r = lwbound::theta_lower_bound(m).map_err(|e| usage(e.to_string()))?;
        let sign = match r.sign {
            BoundSign::Negative => "negative",
            BoundSign::Zero => "zero",
            BoundSign::Positive => "positive",
        };
        let _ = writeln!(
            text,
            "{:>3}  {:<9} {:<11} {:.6e}{}",
            m,
            sign,
            r.applicable,
            r.float_estimate,
            r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
        reports.push(r);
    }
    Ok(Computed { results: json!({"bounds": reports}), text, ok: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        RunConfig::parse_from(std::iter::once("cu-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn u_specs() {
        let f = make_field(5, None).unwrap();
        assert_eq!(parse_u(&f, "hex:0x1f").unwrap().bits(), 0x1f);
        assert_eq!(parse_u(&f, "gen^1").unwrap().bits(), f.generator());
        assert_eq!(parse_u(&f, "gen^31").unwrap().bits(), 1);
        assert!(parse_u(&f, "hex:0x20").is_err());
        assert!(parse_u(&f, "7").is_err());
    }

    #[test]
    fn u_and_all_u_are_exclusive() {
        assert!(RunConfig::parse_from(["cu-lab", "permutation", "--m", "3"]).is_err());
        assert!(RunConfig::parse_from(["cu-lab", "permutation", "--m", "3", "--u", "gen^1", "--all-u"]).is_err());
    }

    #[test]
    fn bad_u_is_usage_error() {
        let out = run(&cfg(&["permutation", "--m", "3", "--u", "nope"]));
        assert_eq!(out.code, EXIT_USAGE);
        assert!(out.stderr.contains("u must be"));
    }

    #[test]
    fn threshold() {
        let out = run(&cfg(&["bound", "--find-threshold", "--json"]));
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.report.unwrap().results["threshold"], 25);
    }
}
