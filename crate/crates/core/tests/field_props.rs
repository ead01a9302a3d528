use cu_lab::field2m::{make_field, FieldSpec};
use proptest::prelude::*;

// Shift-and-add multiplication with bitwise reduction, kept separate from the library kernel.
fn oracle_mul(a: u64, b: u64, m: u32, modulus: u128) -> u64 {
    let mut acc: u128 = 0;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u128) << i;
        }
    }
    for bit in (m..128).rev() {
        if (acc >> bit) & 1 == 1 {
            acc ^= modulus << (bit - m);
        }
    }
    acc as u64
}

fn field_and_elements(max_m: u32, n: usize) -> impl Strategy<Value = (FieldSpec, Vec<u64>)> {
    (2..=max_m).prop_flat_map(move |m| {
        let f = if m <= 32 { make_field(m, None).unwrap() } else { FieldSpec::probe_field(m).unwrap() };
        let mask = f.mask();
        (Just(f), proptest::collection::vec(any::<u64>().prop_map(move |x| x & mask), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn multiplication_matches_oracle((f, v) in field_and_elements(64, 2)) {
        prop_assert_eq!(f.mul(v[0], v[1]), oracle_mul(v[0], v[1], f.m(), f.modulus()));
    }

    #[test]
    fn ring_laws((f, v) in field_and_elements(64, 3)) {
        let (a, b, c) = (v[0], v[1], v[2]);
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
        prop_assert_eq!(f.mul(a, 1), a);
        prop_assert_eq!(a ^ a, 0);
    }

    #[test]
    fn inverse_law((f, v) in field_and_elements(64, 1)) {
        let a = v[0];
        if a == 0 {
            prop_assert!(f.inv(a).is_err());
        } else {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn frobenius_is_additive((f, v) in field_and_elements(64, 2)) {
        let (a, b) = (v[0], v[1]);
        prop_assert_eq!(f.square(a ^ b), f.square(a) ^ f.square(b));
        prop_assert_eq!(f.square(a), f.mul(a, a));
    }

    #[test]
    fn sqrt_and_trace((f, v) in field_and_elements(64, 2)) {
        let (a, b) = (v[0], v[1]);
        prop_assert_eq!(f.square(f.sqrt(a)), a);
        prop_assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
        prop_assert_eq!(f.trace(f.square(a)), f.trace(a));
        // Tr(a) = a + a^2 + ... + a^(2^(m-1)) computed directly.
        let mut t = 0u64;
        let mut s = a;
        for _ in 0..f.m() {
            t ^= s;
            s = f.square(s);
        }
        prop_assert_eq!(t, f.trace(a) as u64);
    }

    #[test]
    fn fermat((f, v) in field_and_elements(64, 1)) {
        prop_assert_eq!(f.pow(v[0], f.q()), v[0]);
    }

    #[test]
    fn seventh_root_round_trip((f, v) in field_and_elements(32, 1)) {
        let u = v[0];
        if u != 0 {
            match f.seventh_root(u).unwrap() {
                Some(r) => prop_assert_eq!(f.pow(r, 7), u),
                None => prop_assert!(!f.is_seventh_power(u).unwrap()),
            }
        }
    }
}

#[test]
fn generator_has_full_order() {
    for m in 2..=16 {
        let f = make_field(m, None).unwrap();
        let g = f.generator();
        let order = (1u64 << m) - 1;
        let mut x = 1u64;
        for k in 1..=order {
            x = f.mul(x, g);
            assert_eq!(x == 1, k == order, "m = {m}, k = {k}");
        }
    }
}

#[test]
fn seventh_powers_exhaust_field_when_gcd_is_one() {
    for m in [2u32, 4, 5, 7, 8] {
        let f = make_field(m, None).unwrap();
        assert!(f.elements().filter(|&u| u != 0).all(|u| f.is_seventh_power(u).unwrap()), "m = {m}");
    }
    let f = make_field(9, None).unwrap();
    let count = f.elements().filter(|&u| u != 0 && f.is_seventh_power(u).unwrap()).count();
    assert_eq!(count, 511 / 7);
}
