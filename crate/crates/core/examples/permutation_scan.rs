//! Exhaustive permutation test of C_u for every u in GF(8), then one u in GF(2^9).
//!
//! ```bash
//! cargo run --release --example permutation_scan
//! ```

use cu_lab::cu_analysis::is_permutation;
use cu_lab::field2m::make_field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = make_field(3, None)?;
    for bits in 1..8 {
        let u = f.element(bits)?;
        let (perm, witness) = is_permutation(&f, &u)?;
        match witness {
            None => println!("m = 3, u = {u}: permutation"),
            Some(w) => println!("m = 3, u = {u}: collision at {:?} + {:?}", w.point.bits(), w.delta.bits()),
        }
        assert_eq!(perm, bits != 1);
    }

    let f = make_field(9, None)?;
    let u = f.element(f.generator())?;
    let (perm, witness) = is_permutation(&f, &u)?;
    println!("m = 9, u = {u}: permutation = {perm}");
    if let Some(w) = witness {
        println!("{}", serde_json::to_string_pretty(&w.to_json())?);
    }
    Ok(())
}
