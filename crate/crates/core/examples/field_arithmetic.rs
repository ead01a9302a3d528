//! Arithmetic in GF(2^9): products, inverses, square roots, traces and 7th roots.
//!
//! ```bash
//! cargo run --example field_arithmetic
//! ```

use cu_lab::field2m::make_field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = make_field(9, None)?;
    println!("GF(2^{}) modulo {:#x}, generator {:#x}", f.m(), f.modulus(), f.generator());

    let a = f.element(0x1a5)?;
    let b = f.element(0x03c)?;
    let prod = a.mul(&b)?;
    println!("{a} * {b} = {prod}");
    println!("{a}^-1 = {}", a.inv()?);
    println!("sqrt({a}) = {}, squared back = {}", a.sqrt(), a.sqrt().square());
    println!("Tr({a}) = {}", a.trace());

    // 7 divides 2^9 - 1 = 511, so only one nonzero element in seven is a 7th power
    let g = f.element(f.generator())?;
    for u in [g.clone(), g.pow(7)] {
        match f.seventh_root(u.bits())? {
            Some(w) => println!("{u} = {:#x}^7", w),
            None => println!("{u} is not a 7th power"),
        }
    }
    Ok(())
}
