//! Dense univariate polynomials over a binary field, coefficients low to high.
//!
//! Only what the randomized probes need: specialization targets, remainders and gcds.

use crate::field2m::FieldSpec;

pub(crate) fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub(crate) fn degree(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub(crate) fn add_assign(acc: &mut Vec<u64>, other: &[u64]) {
    if acc.len() < other.len() {
        acc.resize(other.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
    trim(acc);
}

pub(crate) fn mul(f: &FieldSpec, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] ^= f.mul(x, y);
            }
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo the nonzero polynomial `d`.
pub(crate) fn rem(f: &FieldSpec, a: &[u64], d: &[u64]) -> Vec<u64> {
    let dd = degree(d).expect("nonzero divisor");
    let lc_inv = f.inv(d[dd]).expect("nonzero leading coefficient");
    let mut r = a.to_vec();
    trim(&mut r);
    while let Some(dr) = degree(&r) {
        if dr < dd {
            break;
        }
        let c = f.mul(r[dr], lc_inv);
        let shift = dr - dd;
        for (j, &dj) in d[..=dd].iter().enumerate() {
            if dj != 0 {
                r[shift + j] ^= f.mul(c, dj);
            }
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn mul_mod(f: &FieldSpec, a: &[u64], b: &[u64], modulus: &[u64]) -> Vec<u64> {
    rem(f, &mul(f, a, b), modulus)
}

/// Monic gcd; the gcd of two zero polynomials is zero.
pub(crate) fn gcd(f: &FieldSpec, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(d) = degree(&x) {
        let inv = f.inv(x[d]).expect("nonzero");
        for c in x.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    x
}
