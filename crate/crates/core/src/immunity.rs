//! Canonical numberings of finite sets and canonical immunity at finite
//! horizons.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::machine::{eval, we_truncate, ProgramIndex};
use crate::oracle::FunctionOracle;
use crate::order::OrderFunction;
use crate::pairing::unpair;
use crate::{nat, Error, Nat, Result};

/// A decidable set of naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetPredicate {
    All,
    Empty,
    Evens,
    /// Multiples of `m >= 1`.
    Multiples(u64),
    /// Exactly the listed elements.
    Table(BTreeSet<u64>),
    /// `x` is a member when the program outputs 1 on `x` within `budget`.
    Program { index: ProgramIndex, budget: u64 },
}

impl SetPredicate {
    pub fn decide(&self, x: u64) -> Result<bool> {
        Ok(match self {
            SetPredicate::All => true,
            SetPredicate::Empty => false,
            SetPredicate::Evens => x.is_multiple_of(2),
            SetPredicate::Multiples(m) => x.is_multiple_of(*m),
            SetPredicate::Table(t) => t.contains(&x),
            SetPredicate::Program { index, budget } => {
                let out = eval(index, &[nat(x)], *budget);
                match out.value() {
                    Some(v) => v.is_one(),
                    None => {
                        return Err(Error::Undetermined {
                            what: format!("membership of {x} in {self}"),
                            budget: *budget,
                        })
                    }
                }
            }
        })
    }

    pub fn contains_all(&self, set: &BTreeSet<u64>) -> Result<bool> {
        for &x in set {
            if !self.decide(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The first `count` elements in increasing order, searching `x < cap`.
    pub fn first(&self, count: u64, cap: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        let mut x = 0;
        while (out.len() as u64) < count {
            if x >= cap {
                return Err(Error::HorizonTooSmall(format!(
                    "{self} has only {} elements below {cap}, {count} needed",
                    out.len()
                )));
            }
            if self.decide(x)? {
                out.push(x);
            }
            x += 1;
        }
        Ok(out)
    }
}

impl fmt::Display for SetPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetPredicate::All => write!(f, "all"),
            SetPredicate::Empty => write!(f, "empty"),
            SetPredicate::Evens => write!(f, "evens"),
            SetPredicate::Multiples(m) => write!(f, "multiples:{m}"),
            SetPredicate::Table(t) => {
                let items: Vec<String> = t.iter().map(ToString::to_string).collect();
                write!(f, "table:{}", items.join(","))
            }
            SetPredicate::Program { index, budget } => write!(f, "program:{index},{budget}"),
        }
    }
}

impl FromStr for SetPredicate {
    type Err = Error;

    /// `all`, `empty`, `evens`, `multiples:m`, `table:x,y,...` or
    /// `program:index,budget`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot read set `{s}`"));
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        Ok(match kind.trim() {
            "all" => SetPredicate::All,
            "empty" => SetPredicate::Empty,
            "evens" => SetPredicate::Evens,
            "multiples" => match arg.trim().parse() {
                Ok(m) if m >= 1 => SetPredicate::Multiples(m),
                _ => return Err(bad()),
            },
            "table" => SetPredicate::Table(
                arg.split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            "program" => {
                let (i, b) = arg.split_once(',').ok_or_else(bad)?;
                SetPredicate::Program {
                    index: ProgramIndex(Nat::from_str(i.trim()).map_err(|_| bad())?),
                    budget: b.trim().parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        })
    }
}

/// `e -> D_e`, a numbering of finite sets with a computable cardinality.
pub trait Numbering {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>>;

    fn card(&self, e: u64) -> Result<u64>;

    fn member(&self, e: u64, x: u64) -> Result<bool> {
        Ok(self.members(e)?.contains(&x))
    }

    fn describe(&self) -> String;
}

/// The k-th finite set in the canonical list: the positions of the 1-bits
/// of `k`.
pub fn canonical_finite_set(k: u64) -> BTreeSet<u64> {
    (0..64).filter(|i| k >> i & 1 == 1).collect()
}

/// Explicit entries; indices past the table are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableNumbering {
    pub entries: Vec<BTreeSet<u64>>,
}

impl Numbering for TableNumbering {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        self.entries
            .get(e as usize)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("index {e} is past the {}-entry table", self.entries.len())))
    }

    fn card(&self, e: u64) -> Result<u64> {
        Ok(self.members(e)?.len() as u64)
    }

    fn describe(&self) -> String {
        format!("table[{}]", self.entries.len())
    }
}

/// Membership and cardinality given by programs: `member(e, x)` outputs 1
/// for members, `card(e)` outputs `|D_e|`; members are found by searching
/// `x < x_cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramNumbering {
    pub member: ProgramIndex,
    pub card: ProgramIndex,
    pub budget: u64,
    pub x_cap: u64,
}

impl ProgramNumbering {
    fn run(&self, p: &ProgramIndex, args: &[Nat], what: impl FnOnce() -> String) -> Result<Nat> {
        eval(p, args, self.budget).value().cloned().ok_or_else(|| Error::Undetermined {
            what: what(),
            budget: self.budget,
        })
    }
}

impl Numbering for ProgramNumbering {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        let want = self.card(e)?;
        let mut out = BTreeSet::new();
        for x in 0..self.x_cap {
            if out.len() as u64 == want {
                return Ok(out);
            }
            if self.run(&self.member, &[nat(e), nat(x)], || format!("membership of {x} in D_{e}"))?.is_one() {
                out.insert(x);
            }
        }
        if out.len() as u64 == want {
            return Ok(out);
        }
        Err(Error::Undetermined {
            what: format!("D_{e}: {} of {want} members below {}", out.len(), self.x_cap),
            budget: self.budget,
        })
    }

    fn card(&self, e: u64) -> Result<u64> {
        self.run(&self.card, &[nat(e)], || format!("card(D_{e})"))?
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("card(D_{e}) does not fit u64")))
    }

    fn describe(&self) -> String {
        format!("program:{},{};budget {}", self.member, self.card, self.budget)
    }
}

type MembersFn = dyn Fn(u64) -> Result<BTreeSet<u64>> + Send + Sync;

/// A numbering given by a closure; `card` is the size of the entry.
pub struct FnNumbering {
    label: String,
    members: Box<MembersFn>,
}

impl FnNumbering {
    pub fn new(label: impl Into<String>, f: impl Fn(u64) -> BTreeSet<u64> + Send + Sync + 'static) -> Self {
        FnNumbering {
            label: label.into(),
            members: Box::new(move |e| Ok(f(e))),
        }
    }
}

impl Numbering for FnNumbering {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        (self.members)(e)
    }

    fn card(&self, e: u64) -> Result<u64> {
        Ok(self.members(e)?.len() as u64)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// An entry `D_e` reported against a bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetWitness {
    pub e: u64,
    pub set: BTreeSet<u64>,
    pub card: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CiReport {
    pub horizon: u64,
    /// `e` with `D_e ⊆ R` and `|D_e| > bound(e)`.
    pub violations: Vec<SetWitness>,
    /// Entries a budget could not settle, with the reason.
    pub undetermined: Vec<(u64, String)>,
}

impl CiReport {
    pub fn indices(&self) -> Vec<u64> {
        self.violations.iter().map(|w| w.e).collect()
    }
}

pub(crate) fn settle<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::Undetermined { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

/// `{e <= horizon : D_e ⊆ R and |D_e| > bound(e)}`.
pub fn ci_violations_with(
    r: &SetPredicate,
    bound: impl Fn(u64) -> Result<u64>,
    d: &dyn Numbering,
    horizon: u64,
) -> Result<CiReport> {
    let mut report = CiReport {
        horizon,
        ..CiReport::default()
    };
    for e in 0..=horizon {
        let entry = settle(d.card(e).and_then(|c| Ok((c, d.members(e)?))))?;
        let (card, set) = match entry {
            Ok(v) => v,
            Err(why) => {
                report.undetermined.push((e, why));
                continue;
            }
        };
        if card != set.len() as u64 {
            return Err(Error::InvariantBreach(format!(
                "card(D_{e}) = {card} but the entry has {} members",
                set.len()
            )));
        }
        let b = bound(e)?;
        if card <= b {
            continue;
        }
        match settle(r.contains_all(&set))? {
            Ok(true) => report.violations.push(SetWitness { e, set, card, bound: b }),
            Ok(false) => {}
            Err(why) => report.undetermined.push((e, why)),
        }
    }
    Ok(report)
}

pub fn ci_violations(r: &SetPredicate, h: &OrderFunction, d: &dyn Numbering, horizon: u64) -> Result<CiReport> {
    ci_violations_with(r, |e| h.small(e), d, horizon)
}

/// `card(e) == |members(e)|` for every `e <= horizon`; the first mismatch.
pub fn check_card(d: &dyn Numbering, horizon: u64) -> Result<Option<u64>> {
    for e in 0..=horizon {
        if d.card(e)? != d.members(e)?.len() as u64 {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

/// Even entries hold the first `h(2n) + 1` elements of `R`, odd entries the
/// canonical list, so `R` contains an entry larger than `h` allows at every
/// even index.
#[derive(Debug, Clone)]
pub struct DefeatCi {
    pub r: SetPredicate,
    pub h: OrderFunction,
    pub search_cap: u64,
    evens: Vec<BTreeSet<u64>>,
}

pub fn defeat_ci_numbering(r: &SetPredicate, h: &OrderFunction, horizon: u64, search_cap: u64) -> Result<DefeatCi> {
    let mut evens = Vec::new();
    for n in 0..=horizon / 2 {
        let want = h.small(2 * n)? + 1;
        let got = r.first(want, search_cap).map_err(|err| match err {
            Error::HorizonTooSmall(why) => Error::HorizonTooSmall(format!("entry D_{}: {why}", 2 * n)),
            other => other,
        })?;
        evens.push(got.into_iter().collect());
    }
    Ok(DefeatCi {
        r: r.clone(),
        h: h.clone(),
        search_cap,
        evens,
    })
}

impl Numbering for DefeatCi {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        if e % 2 == 1 {
            return Ok(canonical_finite_set(e / 2));
        }
        match self.evens.get((e / 2) as usize) {
            Some(s) => Ok(s.clone()),
            None => Ok(self.r.first(self.h.small(e)? + 1, self.search_cap)?.into_iter().collect()),
        }
    }

    fn card(&self, e: u64) -> Result<u64> {
        if e % 2 == 1 {
            Ok((e / 2).count_ones() as u64)
        } else {
            Ok(self.h.small(e)? + 1)
        }
    }

    fn describe(&self) -> String {
        format!("defeat-ci({}, {})", self.r, self.h)
    }
}

/// The Schnorr-test layer `U_c` cut at `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchnorrLayer {
    pub c: u64,
    pub horizon: u64,
    /// `(e, D_e)` for `c < e <= horizon` with `|D_e| >= 2e`.
    pub conditions: Vec<(u64, BTreeSet<u64>)>,
    /// `sum 2^-|D_e|` over the conditions, as `p/q`.
    pub bound: String,
    pub limit: String,
    pub holds: bool,
}

fn two_pow_neg(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

pub fn schnorr_layer(d: &dyn Numbering, c: u64, horizon: u64) -> Result<SchnorrLayer> {
    if c == 0 {
        return Err(Error::invalid("layer index c must be at least 1"));
    }
    let mut conditions = Vec::new();
    let mut bound = BigRational::zero();
    for e in c + 1..=horizon {
        let card = d.card(e)?;
        if card >= 2 * e {
            bound += two_pow_neg(card);
            conditions.push((e, d.members(e)?));
        }
    }
    let limit = two_pow_neg(c);
    Ok(SchnorrLayer {
        c,
        horizon,
        conditions,
        holds: bound <= limit,
        bound: bound.to_string(),
        limit: limit.to_string(),
    })
}

/// Even entries are truncated enumerations `W_{e, g(d)} # h(d)` for the
/// pairs `d <= e <= g(d)` in increasing pair-code order; odd entries are the
/// canonical list.
#[derive(Debug, Clone)]
pub struct EiNumbering {
    /// `(e, d)` behind entry `2k`.
    pub pairs: Vec<(u64, u64)>,
    evens: Vec<BTreeSet<u64>>,
    bounds: Vec<u64>,
}

/// The first `count` pairs `(e, d)` with `d <= e <= g(d)`, by pair code.
pub fn ei_pairs(g: &FunctionOracle, count: usize, code_cap: u64) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for z in 0..code_cap {
        if out.len() == count {
            break;
        }
        let (e, d) = unpair(&nat(z));
        let (e, d) = (e.to_u64().expect("small"), d.to_u64().expect("small"));
        if d <= e && nat(e) <= g.query_u64(d) {
            out.push((e, d));
        }
    }
    if out.len() < count {
        return Err(Error::HorizonTooSmall(format!(
            "only {} admissible pairs below code {code_cap}",
            out.len()
        )));
    }
    Ok(out)
}

pub fn ei_witness_numbering(h: &OrderFunction, g: &FunctionOracle, horizon: u64, code_cap: u64) -> Result<EiNumbering> {
    let pairs = ei_pairs(g, (horizon / 2 + 1) as usize, code_cap)?;
    let mut evens = Vec::new();
    let mut bounds = Vec::new();
    for &(e, d) in &pairs {
        let stage = g
            .query_u64(d)
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("g({d}) does not fit u64")))?;
        let hd = h.small(d)?;
        evens.push(we_truncate(&ProgramIndex::from(e), stage, hd).into_iter().map(|en| en.x).collect());
        bounds.push(hd);
    }
    Ok(EiNumbering { pairs, evens, bounds })
}

impl EiNumbering {
    /// `h~(2k) = h(d)` for the pair behind `2k`; odd indices carry no bound.
    pub fn bound(&self, e: u64) -> Option<u64> {
        e.is_multiple_of(2).then(|| self.bounds.get((e / 2) as usize).copied()).flatten()
    }

    fn even(&self, e: u64) -> Result<&BTreeSet<u64>> {
        self.evens
            .get((e / 2) as usize)
            .ok_or_else(|| Error::invalid(format!("index {e} is past the construction horizon")))
    }
}

impl Numbering for EiNumbering {
    fn members(&self, e: u64) -> Result<BTreeSet<u64>> {
        if e % 2 == 1 {
            Ok(canonical_finite_set(e / 2))
        } else {
            self.even(e).cloned()
        }
    }

    fn card(&self, e: u64) -> Result<u64> {
        if e % 2 == 1 {
            Ok((e / 2).count_ones() as u64)
        } else {
            Ok(self.even(e)?.len() as u64)
        }
    }

    fn describe(&self) -> String {
        format!("ei-witness[{} pairs]", self.pairs.len())
    }
}
