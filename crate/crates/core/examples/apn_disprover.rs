//! Differential uniformity: full tables at m = 3, early exit above 2 at m = 7.
//!
//! ```bash
//! cargo run --release --example apn_disprover
//! ```

use cu_lab::cu_analysis::differential_uniformity;
use cu_lab::field2m::make_field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = make_field(3, None)?;
    for bits in 0..8 {
        let r = differential_uniformity(&f, &f.element(bits)?, None)?;
        println!("m = 3, u = {:#x}: uniformity {}", bits, r.uniformity);
    }

    let f = make_field(7, None)?;
    for bits in [1, 2, 0x35, 0x7f] {
        let r = differential_uniformity(&f, &f.element(bits)?, Some(2))?;
        println!(
            "m = 7, u = {bits:#x}: {} solutions for direction {:?}, output {:?}",
            r.uniformity,
            r.witness_direction.bits(),
            r.witness_output.bits()
        );
    }
    Ok(())
}
