//! Endemic and pandemic numberings: defeating a numbering with a computable
//! bound by a sparse set, and building a numbering that is full on a family
//! of sets wherever a function escapes their enumeration times.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::immunity::{settle, Numbering, SetPredicate, SetWitness};
use crate::machine::{eval, ProgramIndex};
use crate::oracle::FunctionOracle;
use crate::order::OrderFunction;
use crate::pairing::{pair, unpair};
use crate::{nat, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EndemicReport {
    pub horizon: u64,
    /// `e` with `|D_e| >= h(e)` and `D_e ⊆ R`.
    pub witnesses: Vec<SetWitness>,
    pub undetermined: Vec<(u64, String)>,
}

impl EndemicReport {
    pub fn largest(&self) -> Option<u64> {
        self.witnesses.last().map(|w| w.e)
    }

    pub fn indices(&self) -> Vec<u64> {
        self.witnesses.iter().map(|w| w.e).collect()
    }
}

pub fn endemic_check(d: &dyn Numbering, h: &OrderFunction, r: &SetPredicate, horizon: u64) -> Result<EndemicReport> {
    let mut report = EndemicReport {
        horizon,
        ..EndemicReport::default()
    };
    for e in 0..=horizon {
        let set = match settle(d.members(e))? {
            Ok(s) => s,
            Err(why) => {
                report.undetermined.push((e, why));
                continue;
            }
        };
        let b = h.small(e)?;
        if (set.len() as u64) < b {
            continue;
        }
        match settle(r.contains_all(&set))? {
            Ok(true) => report.witnesses.push(SetWitness {
                e,
                card: set.len() as u64,
                set,
                bound: b,
            }),
            Ok(false) => {}
            Err(why) => report.undetermined.push((e, why)),
        }
    }
    Ok(report)
}

/// A numbering with a declared computable bound `b(e) >= max D_e`.
pub trait BoundedNumbering: Numbering {
    fn bound(&self, e: u64) -> Result<u64>;
}

/// Attaches a bound to a numbering; the bound is checked against each entry
/// when it is read.
pub struct WithBound<N> {
    pub inner: N,
    bound: Box<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl<N: Numbering> WithBound<N> {
    pub fn new(inner: N, bound: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        WithBound {
            inner,
            bound: Box::new(bound),
        }
    }
}

impl<N: Numbering> Numbering for WithBound<N> {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        let set = self.inner.members(e)?;
        let b = (self.bound)(e);
        match set.last() {
            Some(&top) if top > b => Err(Error::invalid(format!(
                "declared bound b({e}) = {b} is below max D_{e} = {top}"
            ))),
            _ => Ok(set),
        }
    }

    fn card(&self, e: u64) -> Result<u64> {
        self.inner.card(e)
    }

    fn describe(&self) -> String {
        format!("{} with declared bound", self.inner.describe())
    }
}

impl<N: Numbering> BoundedNumbering for WithBound<N> {
    fn bound(&self, e: u64) -> Result<u64> {
        self.members(e)?;
        Ok((self.bound)(e))
    }
}

/// The sparse set `r_0 < r_1 < ...` defeating a bounded numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PandemicDefeat {
    pub horizon: u64,
    pub elements: Vec<u64>,
    /// `e_j`, least `e` with `h(e) > j`, for the `j` used.
    pub thresholds: Vec<u64>,
    /// Indices `e` with `h(e) = 0`, where the empty entry cannot be
    /// excluded; nothing is claimed below this.
    pub stem: u64,
    /// Set when some needed `r_d` could not be placed within the search cap.
    pub cutoff: Option<String>,
}

impl PandemicDefeat {
    pub fn predicate(&self) -> SetPredicate {
        SetPredicate::Table(self.elements.iter().copied().collect())
    }
}

/// `r_d = 1 + max(r_{d-1}, max { b(k) : k <= e_{d+1} })`.
///
/// An entry with `h(e) = m` and `m` members inside `R` contains some `r_d`
/// with `d >= m - 1`, and `e < e_m`, so `r_{m-1} > b(e) >= max D_e` rules it
/// out. Thresholds are searched up to `search_cap`.
pub fn defeat_pandemic_set(
    d: &dyn BoundedNumbering,
    h: &OrderFunction,
    horizon: u64,
    search_cap: u64,
) -> Result<PandemicDefeat> {
    let needed = h.small(horizon)?;
    let threshold = |j: u64| -> Result<Option<u64>> {
        for e in 0..=search_cap {
            if h.small(e)? > j {
                return Ok(Some(e));
            }
        }
        Ok(None)
    };
    let stem = threshold(0)?.unwrap_or(search_cap);
    let mut elements: Vec<u64> = Vec::new();
    let mut thresholds = Vec::new();
    let mut cutoff = None;
    let mut top_bound: u64 = 0;
    let mut scanned = 0u64;
    for dd in 0..needed {
        let Some(next) = threshold(dd + 1)? else {
            cutoff = Some(format!("h stays at most {} up to {search_cap}; r_{dd} not placed", dd + 1));
            break;
        };
        while scanned <= next {
            top_bound = top_bound.max(d.bound(scanned)?);
            scanned += 1;
        }
        let prev = elements.last().copied().unwrap_or(0);
        elements.push(1 + prev.max(top_bound));
        thresholds.push(next);
    }
    Ok(PandemicDefeat {
        horizon,
        elements,
        thresholds,
        stem,
        cutoff,
    })
}

/// `D_<e,k>` = the first `h(<e,k>)` members of `R_k` found below `f(e)`, each
/// membership test run for `f(e)` steps. There is no computable bound on
/// the entries in general, so this does not implement [`BoundedNumbering`].
pub struct PandemicNumbering {
    pub f: FunctionOracle,
    pub h: OrderFunction,
    pub family: Vec<ProgramIndex>,
    /// Sorted arrival times of each set's members, per `(k, cap)`.
    times: Mutex<HashMap<(u64, u64), Vec<u64>>>,
}

pub fn build_pandemic_numbering(f: FunctionOracle, h: &OrderFunction, family: Vec<ProgramIndex>) -> Result<PandemicNumbering> {
    if family.is_empty() {
        return Err(Error::invalid("the family of sets is empty"));
    }
    Ok(PandemicNumbering {
        f,
        h: h.clone(),
        family,
        times: Mutex::default(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrontierRow {
    pub e: u64,
    pub k: u64,
    pub f_e: u64,
    /// Least time at which `R_k` shows `h(<e,k>)` members, if below the cap.
    pub t: Option<u64>,
    pub full: bool,
}

impl FrontierRow {
    pub fn guarantee_holds(&self) -> bool {
        self.full == self.t.is_some_and(|t| self.f_e >= t)
    }
}

impl PandemicNumbering {
    fn split(&self, z: u64) -> Result<(u64, u64)> {
        let (e, k) = unpair(&nat(z));
        let (e, k) = (e.to_u64().expect("below z"), k.to_u64().expect("below z"));
        if k as usize >= self.family.len() {
            return Err(Error::invalid(format!(
                "entry {z} names set R_{k}, but the family has {} sets",
                self.family.len()
            )));
        }
        Ok((e, k))
    }

    fn f_of(&self, e: u64) -> Result<u64> {
        self.f
            .query_u64(e)
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("f({e}) does not fit u64")))
    }

    pub fn index(e: u64, k: u64) -> u64 {
        pair(&nat(e), &nat(k)).to_u64().expect("small pair")
    }

    /// `t_k(e)`: least `T` with `h(<e,k>)` members `x < T` whose test halts
    /// with 1 within `T` steps; `None` if not reached by `cap`.
    pub fn enumeration_time(&self, e: u64, k: u64, cap: u64) -> Result<Option<u64>> {
        let need = self.h.small(Self::index(e, k))?;
        if need == 0 {
            return Ok(Some(0));
        }
        let mut memo = self.times.lock().expect("times memo poisoned");
        let times = memo.entry((k, cap)).or_insert_with(|| {
            let mut t: Vec<u64> = (0..cap)
                .filter_map(|x| {
                    let out = eval(&self.family[k as usize], &[nat(x)], cap);
                    out.value().filter(|v| v.is_one()).map(|_| out.steps_used.max(x + 1))
                })
                .collect();
            t.sort_unstable();
            t
        });
        Ok(times.get(need as usize - 1).copied())
    }

    /// The full-entry guarantee on `e <= e_max`, every `k`, with `t_k(e)`
    /// measured up to `cap`.
    pub fn frontier(&self, e_max: u64, cap: u64) -> Result<Vec<FrontierRow>> {
        let mut rows = Vec::new();
        for e in 0..=e_max {
            for k in 0..self.family.len() as u64 {
                let z = Self::index(e, k);
                rows.push(FrontierRow {
                    e,
                    k,
                    f_e: self.f_of(e)?,
                    t: self.enumeration_time(e, k, cap)?,
                    full: self.card(z)? == self.h.small(z)?,
                });
            }
        }
        Ok(rows)
    }
}

impl Numbering for PandemicNumbering {
    fn members(&self, z: u64) -> Result<BTreeSet<u64>> {
        let (e, k) = self.split(z)?;
        let want = self.h.small(z)? as usize;
        let budget = self.f_of(e)?;
        let mut out = BTreeSet::new();
        for x in 0..budget {
            if out.len() == want {
                break;
            }
            if eval(&self.family[k as usize], &[nat(x)], budget).value().is_some_and(One::is_one) {
                out.insert(x);
            }
        }
        Ok(out)
    }

    fn card(&self, z: u64) -> Result<u64> {
        Ok(self.members(z)?.len() as u64)
    }

    fn describe(&self) -> String {
        format!("pandemic[{} sets, f = {}]", self.family.len(), self.f.label())
    }
}
