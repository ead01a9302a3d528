use cu_lab::field2m::{make_field, FieldSpec};
use cu_lab::mpoly::{parse_poly_file, write_poly_file, Monomial, MPoly, PolyFile, Var, NVARS};
use proptest::prelude::*;

fn monomial() -> impl Strategy<Value = Monomial> {
    proptest::array::uniform7(0u32..=8).prop_map(|e| Monomial::from_exponents(e).unwrap())
}

fn poly() -> impl Strategy<Value = MPoly> {
    proptest::collection::vec(monomial(), 0..=20).prop_map(MPoly::from_monomials_xor)
}

fn assignment(field: &FieldSpec) -> impl Strategy<Value = [u64; NVARS]> {
    let mask = field.mask();
    proptest::array::uniform7(any::<u64>()).prop_map(move |v| v.map(|x| x & mask))
}

// Term-by-term evaluation with plain exponentiation.
fn oracle_eval(p: &MPoly, f: &FieldSpec, values: &[u64; NVARS]) -> u64 {
    p.monomials().iter().fold(0, |acc, m| {
        let e = m.exponents();
        acc ^ (0..NVARS).fold(1, |t, i| f.mul(t, f.pow(values[i], e[i] as u128)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(p.add(&q).add(&r), p.add(&q.add(&r)));
        prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
        prop_assert_eq!(p.mul(&q).unwrap().mul(&r).unwrap(), p.mul(&q.mul(&r).unwrap()).unwrap());
        prop_assert_eq!(p.mul(&q.add(&r)).unwrap(), p.mul(&q).unwrap().add(&p.mul(&r).unwrap()));
        prop_assert_eq!(p.mul(&MPoly::one()).unwrap(), p.clone());
        prop_assert!(p.mul(&MPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn characteristic_two(p in poly()) {
        prop_assert!(p.add(&p).is_zero());
        prop_assert_eq!(p.square().unwrap(), p.mul(&p).unwrap());
    }

    #[test]
    fn division_soundness(p in poly(), d in poly()) {
        if !d.is_zero() {
            let product = p.mul(&d).unwrap();
            let q = product.divide_exact(&d).unwrap();
            prop_assert_eq!(q.as_ref(), Some(&p));
            if let Some(q) = p.divide_exact(&d).unwrap() {
                prop_assert_eq!(q.mul(&d).unwrap(), p.clone());
            }
            let shifted = product.add(&MPoly::one());
            if let Some(q) = shifted.divide_exact(&d).unwrap() {
                prop_assert_eq!(q.mul(&d).unwrap(), shifted);
            }
        }
    }

    #[test]
    fn serialization_is_canonical(p in poly()) {
        let s = p.serialize();
        let back = MPoly::parse(&s).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.serialize(), s);
        let file = PolyFile { name: "t".to_string(), vars: Var::ALL.to_vec(), poly: p.clone() };
        let text = write_poly_file(&file);
        let parsed = parse_poly_file(&text).unwrap();
        prop_assert_eq!(&parsed.poly, &p);
        prop_assert_eq!(write_poly_file(&parsed), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), v in assignment(&make_field(13, None).unwrap())) {
        let f = make_field(13, None).unwrap();
        let pq = p.mul(&q).unwrap();
        prop_assert_eq!(pq.eval_raw(&f, &v), f.mul(p.eval_raw(&f, &v), q.eval_raw(&f, &v)));
        prop_assert_eq!(p.add(&q).eval_raw(&f, &v), p.eval_raw(&f, &v) ^ q.eval_raw(&f, &v));
        prop_assert_eq!(p.eval_raw(&f, &v), oracle_eval(&p, &f, &v));
    }

    #[test]
    fn substitution_commutes_with_evaluation(p in poly(), n in poly(), d in poly(), v in assignment(&make_field(13, None).unwrap())) {
        let f = make_field(13, None).unwrap();
        let n = n.set_zero(Var::Al);
        let d = d.set_zero(Var::Al);
        let k = p.degree_in(Var::Al).unwrap_or(0);
        let dv = d.eval_raw(&f, &v);
        if dv != 0 {
            let sub = p.substitute(Var::Al, &n, &d, k).unwrap();
            let mut w = v;
            w[Var::Al.index()] = f.mul(n.eval_raw(&f, &v), f.inv(dv).unwrap());
            let expected = f.mul(p.eval_raw(&f, &w), f.pow(dv, k as u128));
            prop_assert_eq!(sub.eval_raw(&f, &v), expected);
        }
    }
}

#[test]
fn displayed_products() {
    let p = |s: &str| MPoly::parse(s).unwrap();
    assert_eq!(p("X + Y").mul(&p("X + Y")).unwrap(), p("X^2 + Y^2"));
    assert_eq!(p("X + 1").pow(3).unwrap(), p("X^3 + X^2 + X + 1"));
    assert_eq!(p("X^3 + X^2 + X + 1").divide_exact(&p("X + 1")).unwrap(), Some(p("X^2 + 1")));
    assert_eq!(p("X^2 + X + 1").divide_exact(&p("X + 1")).unwrap(), None);
    assert_eq!(p("be u^5 + Y u^5").var_valuation(Var::U).unwrap(), 5);
}

#[test]
fn exponent_cap_is_a_hard_error() {
    let x = MPoly::var(Var::X);
    assert!(x.pow(511).is_ok());
    assert!(x.pow(512).is_err());
    assert!(MPoly::parse("X^600").is_err());
}
