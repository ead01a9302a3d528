//! Enumerates the certified collision set over GF(32) and checks each tuple.
//!
//! ```bash
//! cargo run --release --example theta_enumeration
//! ```

use cu_lab::certify::load_certificates;
use cu_lab::cli::DEFAULT_DATA_DIR;
use cu_lab::cu_analysis::theta_scan;
use cu_lab::field2m::make_field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let certs = load_certificates(DEFAULT_DATA_DIR.as_ref())?;
    let f = make_field(5, None)?;
    let u = f.element(f.generator())?;
    let tuples = theta_scan(&f, &u, &certs)?;
    let nontrivial: Vec<_> = tuples.iter().filter(|t| !t.is_trivial()).collect();
    println!("m = 5, u = {u}: {} tuples, {} with a nonzero difference, all collisions", tuples.len(), nontrivial.len());
    for t in nontrivial.iter().take(5) {
        println!("  (x, y, z) = ({:#x}, {:#x}, {:#x}), (a, b, c) = ({:#x}, {:#x}, {:#x})", t.x, t.y, t.z, t.a, t.b, t.c);
    }
    Ok(())
}
