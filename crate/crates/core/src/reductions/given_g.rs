//! From a bound `g` on the DNR oracle to a bound `h` on the target.
//!
//! `r(e, n)` is an index of the constant function with value
//! `project(n, e, phi_e(n))`. The target at `n` packs the oracle's answers
//! at `r(0, n), ..., r(n-1, n)` into one n-tuple, so agreeing with a
//! convergent `phi_e(n)` would force the oracle to agree with
//! `phi_{r(e,n)}(r(e,n))`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::Reduction;
use crate::machine::{encode_program, eval, programs, smn, ProgramIndex};
use crate::oracle::FunctionOracle;
use crate::order::OrderFunction;
use crate::pairing::{tuple_encode, tuple_max};
use crate::{nat, Error, Nat, Result};

fn projector_program() -> &'static ProgramIndex {
    static INDEX: OnceLock<ProgramIndex> = OnceLock::new();
    INDEX.get_or_init(|| encode_program(&programs::projector()))
}

/// `r(e, n)`.
pub fn projection_index(e: u64, n: u64) -> ProgramIndex {
    smn(projector_program(), &[nat(e), nat(n)])
}

/// The construction with its bound tabulated on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct GivenG {
    pub g: OrderFunction,
    pub horizon: u64,
    /// `max { tuple_encode(n, i) : i_k < g(r(k, n)) }`, 0 at `n = 0`.
    pub h_raw: Vec<Nat>,
    /// Strict bound: running max of `h_raw + 1`, floored at 2.
    pub h: OrderFunction,
    pub reduction: Reduction,
}

/// A point where the target agrees with a convergent `phi_e(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub e: u64,
    pub n: u64,
    #[serde(with = "crate::natser")]
    pub value: Nat,
    /// `phi_{r(e,n)}(r(e,n))` halts with the oracle's value at `r(e, n)`.
    pub identity_holds: bool,
}

fn target(f: &FunctionOracle, n: u64) -> Result<Nat> {
    if n == 0 {
        return Ok(Nat::zero());
    }
    let answers: Vec<Nat> = (0..n).map(|k| f.query(&projection_index(k, n).0)).collect();
    tuple_encode(n as usize, &answers)
}

/// Steps the projector needs beyond `phi_e(n)` itself.
fn projection_overhead(n: u64) -> u64 {
    3 + 1 + 4 + 8 * (n + 1) + 2
}

impl GivenG {
    /// Every `e < n` with `phi_e(n)` halting within `budget` on the target
    /// value, with the identity the argument relies on re-checked by running
    /// `r(e, n)` on itself.
    pub fn collisions(&self, f: &FunctionOracle, n: u64, budget: u64) -> Result<Vec<Collision>> {
        let j = target(f, n)?;
        let mut out = Vec::new();
        for e in 0..n {
            let Some(v) = eval(&ProgramIndex::from(e), &[nat(n)], budget).value().cloned() else {
                continue;
            };
            if v != j {
                continue;
            }
            let r = projection_index(e, n);
            let own = eval(&r, std::slice::from_ref(&r.0), budget + projection_overhead(n));
            out.push(Collision {
                e,
                n,
                value: v,
                identity_holds: own.value() == Some(&f.query(&r.0)),
            });
        }
        Ok(out)
    }
}

/// Builds the reduction and tabulates its bound up to `horizon`.
pub fn dnr_to_snpr_given_g(g: &OrderFunction, horizon: u64) -> Result<GivenG> {
    let mut h_raw = vec![Nat::zero()];
    for n in 1..=horizon {
        let bounds: Vec<Nat> = (0..n)
            .map(|k| g.value(&projection_index(k, n).0))
            .collect::<Result<_>>()?;
        let top = tuple_max(&bounds)
            .ok_or_else(|| Error::OrderViolation { n, reason: "g vanishes on a query".into() })?;
        h_raw.push(top);
    }
    let mut best = nat(2);
    let table: Vec<Nat> = h_raw
        .iter()
        .map(|v| {
            let v = v + 1u32;
            if v > best {
                best = v;
            }
            best.clone()
        })
        .collect();
    let parameters = BTreeMap::from([
        ("g".to_string(), g.to_string()),
        ("horizon".to_string(), horizon.to_string()),
    ]);
    let reduction = Reduction::new(
        "dnr-to-snpr-given-g",
        parameters,
        |f, n| {
            let n = n
                .to_u64()
                .ok_or_else(|| Error::invalid("input does not fit a machine word"))?;
            target(f, n)
        },
        |n| {
            let n = n
                .to_u64()
                .ok_or_else(|| Error::invalid("input does not fit a machine word"))?;
            Ok((0..n).map(|k| projection_index(k, n).0).collect::<BTreeSet<_>>())
        },
    );
    Ok(GivenG {
        g: g.clone(),
        horizon,
        h_raw,
        h: OrderFunction::table(table),
        reduction,
    })
}
