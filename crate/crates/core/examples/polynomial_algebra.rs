//! Sparse polynomials over GF(2): parsing, products, exact division and probes.
//!
//! ```bash
//! cargo run --example polynomial_algebra
//! ```

use cu_lab::field2m::make_field;
use cu_lab::mpoly::{randomized_coprimality, Assignment, MPoly, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p: MPoly = "be^2 u + Y^2 u".parse()?;
    let q: MPoly = "X^3 + be X + Z u + 1".parse()?;
    let pq = p.mul(&q)?;
    println!("p = {p}\nq = {q}\np q has {} monomials", pq.len());
    println!("p q / p = {}", pq.divide_exact(&p)?.expect("exact"));
    println!("p q + 1 divisible by p: {}", pq.toggle(cu_lab::mpoly::Monomial::ONE).divide_exact(&p)?.is_some());

    // clear the denominator of X := Y / u in q
    let sub = q.substitute(Var::X, &MPoly::var(Var::Y), &MPoly::var(Var::U), 3)?;
    println!("u^3 q(Y/u) = {sub}");

    let f = make_field(13, None)?;
    let at = Assignment::new()
        .with(Var::Be, f.element(7)?)
        .with(Var::Y, f.element(7)?)
        .with(Var::U, f.element(1234)?);
    println!("p at be = Y: {}", p.eval(&f, &at)?);

    let coprime = randomized_coprimality(&"Z + be".parse()?, &"Z + Y".parse()?, Var::Z, 64, 20, 1)?;
    println!("Z + be and Z + Y coprime: {coprime}");
    Ok(())
}
