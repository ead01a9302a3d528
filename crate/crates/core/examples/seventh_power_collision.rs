//! Collisions built directly from a 7th root of u, with no search.
//!
//! ```bash
//! cargo run --example seventh_power_collision
//! ```

use cu_lab::cu_analysis::{collision_from_7th_power, cube_fiber_witness, nonpermutation_witness};
use cu_lab::field2m::make_field;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // every u is a 7th power when 7 does not divide 2^m - 1
    let f = make_field(31, None)?;
    let u = f.element(0x1234_5678)?;
    let w = collision_from_7th_power(&f, &u, &f.one(), &f.zero())?;
    println!("m = 31: {}", w.to_json());

    let f = make_field(9, None)?;
    let g = f.element(f.generator())?;
    let w = collision_from_7th_power(&f, &g.pow(7), &g, &g.pow(3))?;
    println!("m = 9, u = g^7: verified = {}", w.verified);
    println!("m = 9, u = g: {}", collision_from_7th_power(&f, &g, &g, &g).unwrap_err());

    let f = make_field(20, None)?;
    let w = cube_fiber_witness(&f, &f.element(5)?)?.expect("m is even");
    println!("m = 20 cube fiber: {:?} and {:?}", w.point.bits(), w.point.add(&w.delta)?.bits());

    let f = make_field(7, None)?;
    let (route, w) = nonpermutation_witness(&f, &f.element(0x2a)?)?.expect("not a permutation");
    println!("m = 7 via {route:?}: verified = {}", w.verified);
    Ok(())
}
