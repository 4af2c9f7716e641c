//! From a bound `h` on the target to a bound `g` on the DNR oracle.
//!
//! Inputs are cut into intervals `[x_n, x_{n+1})` where `x_n` is least with
//! `h(x_n) >= n^n`. On the n-th interval the value at `x` avoids
//! `phi_e(x)` for every `e < n` by running value avoidance with base `n` and
//! `n` digits at the index `r(x)` of `e -> phi_e(x)`. The oracle only needs
//! values below `n` at those queries, which is what the emitted `g` allows.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{avoid_multiple, avoid_query, Reduction};
use crate::machine::{encode_program, programs, smn, ProgramIndex};
use crate::order::OrderFunction;
use crate::{nat, Error, Nat, Result};

fn transpose_program() -> &'static ProgramIndex {
    static INDEX: OnceLock<ProgramIndex> = OnceLock::new();
    INDEX.get_or_init(|| encode_program(&programs::transpose()))
}

/// `r(x)` with `phi_{r(x)}(e) = phi_e(x)`.
pub fn transpose_index(x: u64) -> ProgramIndex {
    smn(transpose_program(), &[nat(x)])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    /// Number of indices avoided, also the digit base and digit count.
    pub n: u64,
    pub start: u64,
    /// Exclusive; clipped to one past the horizon.
    pub end: u64,
    /// Largest oracle argument queried on this interval.
    #[serde(with = "crate::natser")]
    pub max_use: Nat,
}

/// The construction on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct GivenH {
    pub h: OrderFunction,
    pub horizon: u64,
    pub intervals: Vec<Interval>,
    /// Bound for the oracle: `g(y) = n` on `(m_{n-1}, m_n]`.
    pub g: OrderFunction,
    pub reduction: Reduction,
}

impl GivenH {
    pub fn interval_of(&self, x: u64) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.start <= x && x < i.end)
    }
}

fn power(n: u64) -> Nat {
    num_traits::pow(nat(n), n as usize)
}

/// Builds the reduction for inputs up to `horizon`.
pub fn dnr_to_snpr_given_h(h: &OrderFunction, horizon: u64) -> Result<GivenH> {
    // x_n for n = 2, 3, ... while defined on the horizon
    let mut starts: Vec<(u64, u64)> = Vec::new();
    let mut x = 0u64;
    let mut n = 2u64;
    'outer: loop {
        let need = power(n);
        while h.at(x)? < need {
            x += 1;
            if x > horizon {
                break 'outer;
            }
        }
        starts.push((n, x));
        n += 1;
    }
    if starts.is_empty() {
        return Err(Error::HorizonTooSmall(format!(
            "h stays below 4 on [0, {horizon}], so x_2 is undefined"
        )));
    }
    let mut intervals = Vec::new();
    let mut running = Nat::zero();
    for (i, &(n, start)) in starts.iter().enumerate() {
        let end = starts.get(i + 1).map_or(horizon + 1, |&(_, s)| s);
        let mut top = running.clone();
        for x in start..end {
            let r = transpose_index(x);
            for d in 0..n {
                let q = avoid_query(&r.0, d, n).0;
                if q > top {
                    top = q;
                }
            }
        }
        running = top.clone();
        intervals.push(Interval {
            n,
            start,
            end,
            max_use: top,
        });
    }
    let cuts: Vec<(Nat, Nat)> = intervals
        .iter()
        .map(|i| (i.max_use.clone(), nat(i.n)))
        .collect();
    let beyond = nat(intervals.last().map_or(2, |i| i.n + 1));
    let g = OrderFunction::Steps {
        cuts: Arc::new(cuts),
        beyond,
    };

    let table: Arc<Vec<Interval>> = Arc::new(intervals.clone());
    let lookup = {
        let table = Arc::clone(&table);
        move |x: &Nat| -> Result<Option<u64>> {
            let x = x
                .to_u64()
                .filter(|&x| x <= horizon)
                .ok_or_else(|| Error::invalid(format!("input {x} is beyond the horizon {horizon}")))?;
            Ok(table.iter().find(|i| i.start <= x && x < i.end).map(|i| i.n))
        }
    };
    let lookup_use = lookup.clone();
    let avoiders: Arc<Vec<Reduction>> = Arc::new(
        (0..=table.last().map_or(0, |i| i.n))
            .map(|n| avoid_multiple(n.max(2), n.max(1)))
            .collect::<Result<_>>()?,
    );
    let parameters = BTreeMap::from([
        ("h".to_string(), h.to_string()),
        ("horizon".to_string(), horizon.to_string()),
        ("interval_bound".to_string(), "n^n".to_string()),
    ]);
    let reduction = Reduction::new(
        "dnr-to-snpr-given-h",
        parameters,
        move |f, x| match lookup(x)? {
            None => Ok(Nat::zero()),
            Some(n) => {
                let r = transpose_index(x.to_u64().expect("checked by lookup"));
                avoiders[n as usize].apply(f, &r.0)
            }
        },
        move |x| match lookup_use(x)? {
            None => Ok(BTreeSet::new()),
            Some(n) => {
                let r = transpose_index(x.to_u64().expect("checked by lookup"));
                Ok((0..n).map(|d| avoid_query(&r.0, d, n).0).collect())
            }
        },
    );
    Ok(GivenH {
        h: h.clone(),
        horizon,
        intervals,
        g,
        reduction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{eval, programs};
    use crate::oracle::FunctionOracle;

    #[test]
    fn transpose_swaps_arguments() {
        let succ = encode_program(&programs::successor());
        let r = transpose_index(41);
        assert_eq!(eval(&r, &[succ.0], 1000).value(), Some(&nat(42)));
    }

    #[test]
    fn intervals_for_linear_h() {
        // h(x) = 2x + 2 : x_2 = 1, x_3 = 13, x_4 = 127
        let c = dnr_to_snpr_given_h(&OrderFunction::linear(2, 2), 20).unwrap();
        let spans: Vec<(u64, u64, u64)> = c.intervals.iter().map(|i| (i.n, i.start, i.end)).collect();
        assert_eq!(spans, vec![(2, 1, 13), (3, 13, 21)]);
        assert!(c.intervals[0].max_use <= c.intervals[1].max_use);
    }

    #[test]
    fn horizon_too_small() {
        let err = dnr_to_snpr_given_h(&OrderFunction::constant(3), 50).unwrap_err();
        assert!(matches!(err, Error::HorizonTooSmall(_)));
    }

    #[test]
    fn zero_below_first_interval_and_bounded_above() {
        let h = OrderFunction::linear(2, 2);
        let c = dnr_to_snpr_given_h(&h, 14).unwrap();
        let g = c.g.clone();
        let f = FunctionOracle::random_dnr(3, 2_000, move |y| g.value(y).unwrap().to_u64().unwrap());
        assert_eq!(c.reduction.apply_u64(&f, 0).unwrap(), nat(0));
        for x in 0..=14 {
            assert!(c.reduction.apply_u64(&f, x).unwrap() < h.at(x).unwrap());
        }
        assert!(c.reduction.apply_u64(&f, 15).is_err());
    }

    #[test]
    fn g_allows_the_interval_base() {
        let c = dnr_to_snpr_given_h(&OrderFunction::linear(2, 2), 14).unwrap();
        for x in 1..=14 {
            let n = c.interval_of(x).unwrap().n;
            for y in c.reduction.use_set(&nat(x)).unwrap() {
                assert!(c.g.value(&y).unwrap() <= nat(n));
            }
        }
    }
}
