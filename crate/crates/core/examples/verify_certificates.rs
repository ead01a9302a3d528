//! Loads the shipped certificate polynomials and runs every identity check.
//!
//! ```bash
//! cargo run --release --example verify_certificates [DIR]
//! ```

use std::path::PathBuf;

use cu_lab::certify::{load_certificates, run_mutant, sample_monomials, verify_all, ProbeConfig};
use cu_lab::cli::DEFAULT_DATA_DIR;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));
    let certs = load_certificates(&dir)?;
    println!("S has {} monomials, X-degree {:?}", certs.s.len(), certs.s.degree_in(cu_lab::mpoly::Var::X));

    let probe = ProbeConfig::default();
    for r in verify_all(&certs, probe) {
        println!("{:<18} {} ({:.2?})", r.name, r.status(), r.elapsed);
        for line in r.detail().iter().chain(&r.notes) {
            println!("    {line}");
        }
    }

    let sample = sample_monomials(&certs, 10, 7);
    for (file, mono) in sample {
        let m = run_mutant(&certs, &file, mono, probe);
        println!("delete {mono} from {file}: caught by {}", m.killed_by.as_deref().unwrap_or("nothing"));
    }
    Ok(())
}
