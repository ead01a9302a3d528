//! Exact signs of the point-count bound and the smallest odd m where it is positive.
//!
//! ```bash
//! cargo run --example threshold
//! ```

use cu_lab::lwbound::{find_min_odd_m, first_applicable_m, lw_interval, theta_lower_bound};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in [13, 23, 24, 25, 31] {
        let r = theta_lower_bound(m)?;
        println!("m = {m:>2}: {:?} (about {:.3e}){}", r.sign, r.float_estimate, r.note.map(|n| format!(", {n}")).unwrap_or_default());
    }
    println!("smallest odd m: {}", find_min_odd_m()?);
    println!("size condition first holds at m = {:?}", first_applicable_m(3, 27));
    let iv = lw_interval(3, 27, 1 << 25)?;
    println!("point-count interval at m = 25: [{}, {}]", iv.lower, iv.upper);
    Ok(())
}
