//! Finite combinatorics of n-bushy trees over h-bounded strings.
//!
//! Convention: a tree that is n-bushy above a stem contains the stem, all of
//! its leaves extend the stem, and every non-leaf extending the stem has at
//! least n immediate extensions in the tree. `B` is n-big above `sigma` when
//! such a finite tree has all its leaves in `B`.
//!
//! Bigness is decided by backward induction: `sigma` is marked when it lies
//! in `B` or when at least `n` of its children are marked. Only prefixes of
//! members of `B` can be marked, so the induction runs over that trie.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::order::OrderFunction;
use crate::{Error, Result};

/// A finite string of naturals; the bound context is supplied per call.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BoundedString(pub Vec<u32>);

impl BoundedString {
    pub fn empty() -> Self {
        BoundedString(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &BoundedString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn comparable(&self, other: &BoundedString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn child(&self, a: u32) -> BoundedString {
        let mut v = self.0.clone();
        v.push(a);
        BoundedString(v)
    }

    pub fn parent(&self) -> Option<BoundedString> {
        (!self.0.is_empty()).then(|| BoundedString(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn prefix(&self, len: usize) -> BoundedString {
        BoundedString(self.0[..len].to_vec())
    }

    /// Entry at position `i` is below `h(i)`.
    pub fn respects(&self, h: &OrderFunction) -> Result<bool> {
        for (i, &a) in self.0.iter().enumerate() {
            if u64::from(a) >= h.small(i as u64)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl From<Vec<u32>> for BoundedString {
    fn from(v: Vec<u32>) -> Self {
        BoundedString(v)
    }
}

impl fmt::Display for BoundedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "<{}>", items.join(","))
    }
}

/// A finite set of strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct StringSet(pub BTreeSet<BoundedString>);

impl StringSet {
    pub fn new() -> Self {
        StringSet::default()
    }

    pub fn contains(&self, s: &BoundedString) -> bool {
        self.0.contains(s)
    }

    pub fn insert(&mut self, s: BoundedString) -> bool {
        self.0.insert(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BoundedString> {
        self.0.iter()
    }

    /// Length of the longest member, 0 when empty.
    pub fn max_len(&self) -> usize {
        self.0.iter().map(BoundedString::len).max().unwrap_or(0)
    }

    pub fn is_subset(&self, other: &StringSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &StringSet) -> StringSet {
        StringSet(self.0.union(&other.0).cloned().collect())
    }

    /// One string per line as comma-separated naturals; an empty line is the
    /// empty string.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = StringSet::new();
        if text.is_empty() {
            return Ok(out);
        }
        let body = text.strip_suffix('\n').unwrap_or(text);
        for (i, line) in body.split('\n').enumerate() {
            let line = line.trim();
            let entries = if line.is_empty() {
                Vec::new()
            } else {
                line.split(',')
                    .map(|t| {
                        t.trim().parse::<u32>().map_err(|_| Error::Parse {
                            line: i + 1,
                            msg: format!("`{t}` is not a natural number"),
                        })
                    })
                    .collect::<Result<_>>()?
            };
            out.insert(BoundedString(entries));
        }
        Ok(out)
    }

    pub fn to_literal(&self) -> String {
        self.0
            .iter()
            .map(|s| {
                let items: Vec<String> = s.0.iter().map(ToString::to_string).collect();
                items.join(",") + "\n"
            })
            .collect()
    }
}

impl FromIterator<BoundedString> for StringSet {
    fn from_iter<I: IntoIterator<Item = BoundedString>>(iter: I) -> Self {
        StringSet(iter.into_iter().collect())
    }
}

/// A finite tree above a stem, given by its nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTree {
    pub stem: BoundedString,
    pub nodes: StringSet,
}

impl WitnessTree {
    /// Nodes with no proper extension in the tree.
    pub fn leaves(&self) -> Vec<&BoundedString> {
        leaves_of(&self.nodes)
    }
}

fn leaves_of(nodes: &StringSet) -> Vec<&BoundedString> {
    nodes
        .iter()
        .filter(|t| {
            // successors in lexicographic order that extend t come right after it
            nodes
                .0
                .range::<BoundedString, _>((std::ops::Bound::Excluded(*t), std::ops::Bound::Unbounded))
                .next()
                .is_none_or(|next| !t.is_prefix_of(next))
        })
        .collect()
}

/// Whether `tree` is n-bushy above `stem` under the convention above.
pub fn is_bushy(tree: &StringSet, n: u32, stem: &BoundedString) -> bool {
    if !tree.contains(stem) || !tree.iter().all(|t| t.comparable(stem)) {
        return false;
    }
    let mut children: HashMap<&BoundedString, u32> = HashMap::new();
    for t in tree.iter().filter(|t| t.len() > stem.len()) {
        let parent = t.parent().expect("longer than stem");
        match tree.0.get(&parent) {
            Some(p) => *children.entry(p).or_default() += 1,
            None => return false,
        }
    }
    leaves_of(tree).len() + children.len() >= 1
        && tree
            .iter()
            .filter(|t| stem.is_prefix_of(t))
            .all(|t| children.get(t).is_none_or(|&c| c >= n))
}

/// Backward-induction table: `true` at `tau` iff the set is n-big above it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallnessCertificate {
    pub stem: BoundedString,
    pub n: u32,
    pub marks: BTreeMap<BoundedString, bool>,
}

impl SmallnessCertificate {
    /// Re-checks the table against `set`: every prefix (from the stem) of a
    /// member extending the stem is present, every mark obeys the induction
    /// rule, and the stem is unmarked.
    pub fn check(&self, set: &StringSet) -> bool {
        for b in set.iter().filter(|b| self.stem.is_prefix_of(b)) {
            for len in self.stem.len()..=b.len() {
                if !self.marks.contains_key(&b.prefix(len)) {
                    return false;
                }
            }
        }
        let consistent = self.marks.iter().all(|(t, &m)| {
            let marked_children = self
                .marks
                .range::<BoundedString, _>((std::ops::Bound::Excluded(t), std::ops::Bound::Unbounded))
                .take_while(|(c, _)| t.is_prefix_of(c))
                .filter(|(c, &cm)| c.len() == t.len() + 1 && cm)
                .count() as u64;
            m == (set.contains(t) || marked_children >= u64::from(self.n))
        });
        consistent && self.marks.get(&self.stem) != Some(&true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BigDecision {
    Big(WitnessTree),
    Small(SmallnessCertificate),
}

impl BigDecision {
    pub fn is_big(&self) -> bool {
        matches!(self, BigDecision::Big(_))
    }
}

fn validate(set: &StringSet, h: &OrderFunction) -> Result<()> {
    for s in set.iter() {
        if !s.respects(h)? {
            return Err(Error::invalid(format!("{s} is not bounded by {h}")));
        }
    }
    Ok(())
}

/// Marks for every string between `stem` and a member of `set` extending it.
fn marks_above(set: &StringSet, n: u32, stem: &BoundedString) -> BTreeMap<BoundedString, bool> {
    let mut marks: BTreeMap<BoundedString, bool> = BTreeMap::new();
    for b in set.iter().filter(|b| stem.is_prefix_of(b)) {
        for len in stem.len()..=b.len() {
            marks.entry(b.prefix(len)).or_insert(false);
        }
    }
    let mut by_depth: Vec<BoundedString> = marks.keys().cloned().collect();
    by_depth.sort_by_key(|t| std::cmp::Reverse(t.len()));
    let mut counts: HashMap<BoundedString, u32> = HashMap::new();
    for t in by_depth {
        let m = set.contains(&t) || counts.get(&t).copied().unwrap_or(0) >= n;
        if m {
            if let Some(p) = t.parent().filter(|_| t.len() > stem.len()) {
                *counts.entry(p).or_default() += 1;
            }
        }
        marks.insert(t, m);
    }
    marks
}

/// Decides whether `set` is n-big above `stem`, with a smallest witness tree
/// or the induction table as certificate of smallness.
pub fn big_decision(
    set: &StringSet,
    n: u32,
    stem: &BoundedString,
    h: &OrderFunction,
) -> Result<BigDecision> {
    if n == 0 {
        return Err(Error::invalid("branching parameter n must be at least 1"));
    }
    validate(set, h)?;
    let marks = marks_above(set, n, stem);
    if marks.get(stem) != Some(&true) {
        return Ok(BigDecision::Small(SmallnessCertificate {
            stem: stem.clone(),
            n,
            marks,
        }));
    }
    // smallest subtree size below each marked node
    let mut size: HashMap<&BoundedString, usize> = HashMap::new();
    let mut pick: HashMap<&BoundedString, Vec<&BoundedString>> = HashMap::new();
    let mut order: Vec<&BoundedString> = marks.iter().filter(|(_, &m)| m).map(|(t, _)| t).collect();
    order.sort_by_key(|t| std::cmp::Reverse(t.len()));
    for t in order {
        if set.contains(t) {
            size.insert(t, 1);
            continue;
        }
        let mut kids: Vec<(&BoundedString, usize)> = marks
            .range::<BoundedString, _>((std::ops::Bound::Excluded(t), std::ops::Bound::Unbounded))
            .take_while(|(c, _)| t.is_prefix_of(c))
            .filter(|(c, &m)| m && c.len() == t.len() + 1)
            .map(|(c, _)| (c, size[c]))
            .collect();
        kids.sort_by_key(|&(c, s)| (s, c.clone()));
        kids.truncate(n as usize);
        size.insert(t, 1 + kids.iter().map(|&(_, s)| s).sum::<usize>());
        pick.insert(t, kids.into_iter().map(|(c, _)| c).collect());
    }
    let mut nodes = StringSet::new();
    let mut stack = vec![stem];
    while let Some(t) = stack.pop() {
        nodes.insert(t.clone());
        if let Some(kids) = pick.get(t) {
            stack.extend(kids.iter().copied());
        }
    }
    Ok(BigDecision::Big(WitnessTree {
        stem: stem.clone(),
        nodes,
    }))
}

pub fn is_big(set: &StringSet, n: u32, stem: &BoundedString, h: &OrderFunction) -> Result<bool> {
    Ok(big_decision(set, n, stem, h)?.is_big())
}

/// All h-bounded strings of length at most `max_len`, parents before
/// children.
#[derive(Debug, Clone)]
pub struct Universe {
    strings: Vec<BoundedString>,
    children: Vec<Vec<usize>>,
    index: HashMap<BoundedString, usize>,
}

impl Universe {
    pub fn new(h: &OrderFunction, max_len: usize, cap: usize) -> Result<Self> {
        let mut size: u128 = 1;
        let mut level: u128 = 1;
        for i in 0..max_len {
            level = level.saturating_mul(u128::from(h.small(i as u64)?));
            size = size.saturating_add(level);
        }
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                estimate: size,
                cap: cap as u128,
            });
        }
        let mut strings = vec![BoundedString::empty()];
        let mut children = vec![Vec::new()];
        let mut at = 0;
        while at < strings.len() {
            let s = strings[at].clone();
            if s.len() < max_len {
                for a in 0..h.small(s.len() as u64)? {
                    let c = s.child(a as u32);
                    children[at].push(strings.len());
                    strings.push(c);
                    children.push(Vec::new());
                }
            }
            at += 1;
        }
        let index = strings.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Universe {
            strings,
            children,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[BoundedString] {
        &self.strings
    }

    pub fn index_of(&self, s: &BoundedString) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn to_set(&self, mask: u128) -> StringSet {
        (0..self.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.strings[i].clone())
            .collect()
    }

    pub fn to_mask(&self, set: &StringSet) -> Option<u128> {
        if self.len() > 128 {
            return None;
        }
        set.iter()
            .try_fold(0u128, |m, s| self.index_of(s).map(|i| m | 1 << i))
    }

    /// `{tau : set is n-big above tau}` as a mask. Requires `len() <= 128`.
    pub fn closure_mask(&self, set: u128, n: u32) -> u128 {
        debug_assert!(self.len() <= 128);
        let mut marked = 0u128;
        for i in (0..self.len()).rev() {
            let hit = set >> i & 1 == 1
                || self.children[i]
                    .iter()
                    .filter(|&&c| marked >> c & 1 == 1)
                    .count() as u64
                    >= u64::from(n);
            if hit {
                marked |= 1 << i;
            }
        }
        marked
    }
}

/// `C = {tau : set is n-big above tau}` restricted to strings of length at
/// most `max_len`.
pub fn closure_set(set: &StringSet, n: u32, h: &OrderFunction, max_len: usize) -> Result<StringSet> {
    if n == 0 {
        return Err(Error::invalid("branching parameter n must be at least 1"));
    }
    validate(set, h)?;
    Ok(marks_above(set, n, &BoundedString::empty())
        .into_iter()
        .filter(|(t, m)| *m && t.len() <= max_len)
        .map(|(t, _)| t)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub b: StringSet,
    pub c: StringSet,
    pub n: u32,
    pub m: u32,
    pub stem: BoundedString,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: &'static str,
    pub parameters: BTreeMap<&'static str, String>,
    /// Instances examined (set pair or set, parameters, stem).
    pub checked_count: u64,
    /// Instances whose hypothesis held.
    pub premise_count: u64,
    pub counterexample: Option<Counterexample>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Default ceiling on instances an exhaustive verifier may visit.
pub const DEFAULT_CAP: u128 = 1 << 28;

fn universe_for_verifier(h: &OrderFunction, max_len: usize) -> Result<Universe> {
    Universe::new(h, max_len, 128)
}

fn params(h: &OrderFunction, max_len: usize, extra: &[(&'static str, String)]) -> BTreeMap<&'static str, String> {
    let mut p = BTreeMap::from([("h", h.to_string()), ("max_len", max_len.to_string())]);
    p.extend(extra.iter().cloned());
    p
}

struct UnionCheck<'a> {
    u: &'a Universe,
    n_max: u32,
    m_max: u32,
    report: LemmaReport,
}

impl UnionCheck<'_> {
    fn visit(&mut self, b: u128, c: u128, cl_b: &[u128], cl_c: &[u128]) {
        let all = if self.u.len() == 128 { u128::MAX } else { (1u128 << self.u.len()) - 1 };
        let union = b | c;
        let cl_u: Vec<u128> = (1..self.n_max + self.m_max)
            .map(|k| self.u.closure_mask(union, k))
            .collect();
        for n in 1..=self.n_max {
            for m in 1..=self.m_max {
                let premise = !cl_b[n as usize - 1] & !cl_c[m as usize - 1] & all;
                let bad = premise & cl_u[(n + m - 2) as usize];
                self.report.checked_count += self.u.len() as u64;
                self.report.premise_count += u64::from(premise.count_ones());
                if bad != 0 && self.report.counterexample.is_none() {
                    let i = bad.trailing_zeros() as usize;
                    self.report.counterexample = Some(Counterexample {
                        b: self.u.to_set(b),
                        c: self.u.to_set(c),
                        n,
                        m,
                        stem: self.u.strings[i].clone(),
                    });
                }
            }
        }
    }
}

fn closures(u: &Universe, set: u128, k_max: u32) -> Vec<u128> {
    (1..=k_max).map(|k| u.closure_mask(set, k)).collect()
}

/// Exhaustively checks: `B` n-small and `C` m-small above `sigma` imply
/// `B ∪ C` is (n+m-1)-small above `sigma`, over all subsets of the universe.
pub fn verify_smallness_union(
    h: &OrderFunction,
    max_len: usize,
    n_max: u32,
    m_max: u32,
    cap: u128,
) -> Result<LemmaReport> {
    if n_max == 0 || m_max == 0 {
        return Err(Error::invalid("n_max and m_max must be at least 1"));
    }
    let u = universe_for_verifier(h, max_len)?;
    let subsets: u128 = 1u128.checked_shl(u.len() as u32).unwrap_or(u128::MAX);
    let estimate = subsets
        .saturating_mul(subsets)
        .saturating_mul(u128::from(n_max * m_max))
        .saturating_mul(u.len() as u128);
    if estimate > cap {
        return Err(Error::CapExceeded { estimate, cap });
    }
    let cl: Vec<Vec<u128>> = (0..subsets)
        .map(|s| closures(&u, s, n_max.max(m_max)))
        .collect();
    let mut check = UnionCheck {
        u: &u,
        n_max,
        m_max,
        report: LemmaReport {
            lemma: "smallness-union",
            parameters: params(h, max_len, &[("n_max", n_max.to_string()), ("m_max", m_max.to_string()), ("mode", "exhaustive".into())]),
            checked_count: 0,
            premise_count: 0,
            counterexample: None,
        },
    };
    for b in 0..subsets {
        for c in 0..subsets {
            check.visit(b, c, &cl[b as usize], &cl[c as usize]);
        }
    }
    Ok(check.report)
}

fn random_mask(rng: &mut ChaCha8Rng, len: usize) -> u128 {
    let density: f64 = [0.05, 0.15, 0.3, 0.5, 0.7][rng.gen_range(0..5)];
    (0..len).fold(0u128, |m, i| if rng.gen_bool(density) { m | 1 << i } else { m })
}

/// The union lemma on `trials` random `(B, C)` pairs.
pub fn verify_smallness_union_random(
    h: &OrderFunction,
    max_len: usize,
    n_max: u32,
    m_max: u32,
    trials: u64,
    seed: u64,
) -> Result<LemmaReport> {
    if n_max == 0 || m_max == 0 {
        return Err(Error::invalid("n_max and m_max must be at least 1"));
    }
    let u = universe_for_verifier(h, max_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n_max.max(m_max);
    let mut check = UnionCheck {
        u: &u,
        n_max,
        m_max,
        report: LemmaReport {
            lemma: "smallness-union",
            parameters: params(h, max_len, &[("n_max", n_max.to_string()), ("m_max", m_max.to_string()), ("mode", format!("random:{trials},seed={seed}"))]),
            checked_count: 0,
            premise_count: 0,
            counterexample: None,
        },
    };
    for _ in 0..trials {
        let b = random_mask(&mut rng, u.len());
        let c = random_mask(&mut rng, u.len());
        check.visit(b, c, &closures(&u, b, k), &closures(&u, c, k));
    }
    Ok(check.report)
}

fn closure_visit(u: &Universe, b: u128, n_max: u32, report: &mut LemmaReport) {
    for n in 1..=n_max {
        let c = u.closure_mask(b, n);
        let cc = u.closure_mask(c, n);
        let all = if u.len() == 128 { u128::MAX } else { (1u128 << u.len()) - 1 };
        let premise = !u.closure_mask(b, n) & all;
        // (i) B small above sigma => C small above sigma; (ii) C big above rho => rho in C
        let bad = (premise & cc) | (cc & !c);
        report.checked_count += u.len() as u64;
        report.premise_count += u64::from(premise.count_ones());
        if bad != 0 && report.counterexample.is_none() {
            report.counterexample = Some(Counterexample {
                b: u.to_set(b),
                c: u.to_set(c),
                n,
                m: n,
                stem: u.strings[bad.trailing_zeros() as usize].clone(),
            });
        }
    }
}

/// Exhaustively checks the closure `C = {tau : B n-big above tau}`: it is
/// n-small wherever `B` is, and n-closed.
pub fn verify_closure(h: &OrderFunction, max_len: usize, n_max: u32, cap: u128) -> Result<LemmaReport> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let u = universe_for_verifier(h, max_len)?;
    let subsets: u128 = 1u128.checked_shl(u.len() as u32).unwrap_or(u128::MAX);
    let estimate = subsets
        .saturating_mul(u128::from(n_max))
        .saturating_mul(u.len() as u128);
    if estimate > cap {
        return Err(Error::CapExceeded { estimate, cap });
    }
    let mut report = LemmaReport {
        lemma: "small-set-closure",
        parameters: params(h, max_len, &[("n_max", n_max.to_string()), ("mode", "exhaustive".into())]),
        checked_count: 0,
        premise_count: 0,
        counterexample: None,
    };
    for b in 0..subsets {
        closure_visit(&u, b, n_max, &mut report);
    }
    Ok(report)
}

pub fn verify_closure_random(
    h: &OrderFunction,
    max_len: usize,
    n_max: u32,
    trials: u64,
    seed: u64,
) -> Result<LemmaReport> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let u = universe_for_verifier(h, max_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport {
        lemma: "small-set-closure",
        parameters: params(h, max_len, &[("n_max", n_max.to_string()), ("mode", format!("random:{trials},seed={seed}"))]),
        checked_count: 0,
        premise_count: 0,
        counterexample: None,
    };
    for _ in 0..trials {
        let b = random_mask(&mut rng, u.len());
        closure_visit(&u, b, n_max, &mut report);
    }
    Ok(report)
}
