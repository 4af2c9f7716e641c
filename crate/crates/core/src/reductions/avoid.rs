//! Avoiding `c` values at once with a bounded DNR oracle.
//!
//! `s(e, x)` is an index of the constant function returning the x-th base-a
//! digit of `phi_e(x)`. An oracle that is DNR at `s(e, x)` differs from that
//! digit, so reassembling the oracle's answers as base-a digits gives a
//! number that differs from every convergent `phi_e(x)` with `x < c`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_traits::{One, Zero};

use super::Reduction;
use crate::machine::{encode_program, programs, smn, ProgramIndex};
use crate::{nat, Error, Nat};

fn base_digit_index() -> &'static ProgramIndex {
    static INDEX: OnceLock<ProgramIndex> = OnceLock::new();
    INDEX.get_or_init(|| encode_program(&programs::base_digit()))
}

/// `s(e, x)` for digit base `a`.
pub fn avoid_query(e: &Nat, x: u64, a: u64) -> ProgramIndex {
    smn(base_digit_index(), &[e.clone(), nat(x), nat(a)])
}

/// `e -> sum_{x<c} f(s(e, x)) * a^x`, a value below `a^c` that differs from
/// `phi_e(x)` for every `x < c` on which `phi_e` converges, provided the
/// oracle is DNR at the queried indices.
pub fn avoid_multiple(a: u64, c: u64) -> crate::Result<Reduction> {
    if a < 2 {
        return Err(Error::invalid("digit base a must be at least 2"));
    }
    if c == 0 {
        return Err(Error::invalid("number of avoided values c must be positive"));
    }
    let parameters = BTreeMap::from([
        ("a".to_string(), a.to_string()),
        ("c".to_string(), c.to_string()),
        ("output_bound".to_string(), format!("{a}^{c}")),
    ]);
    Ok(Reduction::new(
        "value-avoidance",
        parameters,
        move |f, e| {
            let base = nat(a);
            let mut out = Nat::zero();
            let mut place = Nat::one();
            for x in 0..c {
                let q = avoid_query(e, x, a);
                let d = f.query(&q.0);
                if d >= base {
                    return Err(Error::OracleContract {
                        index: q.0,
                        value: d,
                        bound: base,
                    });
                }
                out += d * &place;
                place *= &base;
            }
            Ok(out)
        },
        move |e| Ok((0..c).map(|x| avoid_query(e, x, a).0).collect::<BTreeSet<_>>()),
    ))
}
