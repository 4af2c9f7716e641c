//! Cantor pairing and the uniform tuple bijections built from it.
//!
//! `tuple_decode(1, m)` is the identity and
//! `tuple_decode(n + 1, m) = (a, tuple_decode(n, b))` with `(a, b) = unpair(m)`.

use num_traits::{One, Zero};

use crate::{Error, Nat, Result};

/// `(x + y)(x + y + 1) / 2 + y`
pub fn pair(x: &Nat, y: &Nat) -> Nat {
    let s = x + y;
    (&s * (&s + 1u32)) / 2u32 + y
}

pub fn unpair(z: &Nat) -> (Nat, Nat) {
    // w = floor((sqrt(8z + 1) - 1) / 2) is the diagonal holding z
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let y = z - t;
    let x = w - &y;
    (x, y)
}

pub fn tuple_encode(n: usize, tuple: &[Nat]) -> Result<Nat> {
    if n == 0 {
        return Err(Error::invalid("tuple arity must be at least 1"));
    }
    if tuple.len() != n {
        return Err(Error::invalid(format!(
            "expected a {n}-tuple, got {} coordinates",
            tuple.len()
        )));
    }
    let mut iter = tuple.iter().rev();
    let mut acc = iter.next().cloned().unwrap_or_else(Nat::zero);
    for head in iter {
        acc = pair(head, &acc);
    }
    Ok(acc)
}

pub fn tuple_decode(n: usize, m: &Nat) -> Result<Vec<Nat>> {
    if n == 0 {
        return Err(Error::invalid("tuple arity must be at least 1"));
    }
    let mut out = Vec::with_capacity(n);
    let mut rest = m.clone();
    for _ in 1..n {
        let (a, b) = unpair(&rest);
        out.push(a);
        rest = b;
    }
    out.push(rest);
    Ok(out)
}

/// The `i`-th coordinate of `tuple_decode(n, m)`, without decoding the tail.
pub fn project(n: usize, i: usize, m: &Nat) -> Result<Nat> {
    if n == 0 || i >= n {
        return Err(Error::invalid(format!(
            "projection {i} out of range for arity {n}"
        )));
    }
    let mut rest = m.clone();
    for _ in 0..i {
        rest = unpair(&rest).1;
    }
    if i + 1 == n {
        Ok(rest)
    } else {
        Ok(unpair(&rest).0)
    }
}

/// Largest `tuple_encode(n, t)` over `t[k] < bounds[k]`.
///
/// Pairing is monotone in each argument, so the maximum sits at the corner
/// `t[k] = bounds[k] - 1`. Returns `None` when some bound is zero (empty box).
pub fn tuple_max(bounds: &[Nat]) -> Option<Nat> {
    if bounds.iter().any(Zero::is_zero) {
        return None;
    }
    let corner: Vec<Nat> = bounds.iter().map(|b| b - Nat::one()).collect();
    tuple_encode(corner.len(), &corner).ok()
}
