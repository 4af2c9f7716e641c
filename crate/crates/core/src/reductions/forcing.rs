//! A budgeted, windowed simulation of the forcing construction of a low
//! bounded-DNR function that computes no DNR function for a smaller bound.
//!
//! The construction asks halting questions. Each is answered by a search of
//! `oracle_budget` steps, and sets of extensions are only examined up to
//! `window` levels above the current string. Every transcript is therefore
//! an approximation at that budget and window, and says so.
//!
//! The bad set `B_s` is the set of non-DNR strings (implicit) together with
//! the explicit sets added at "otherwise" stages. Bigness of `B_s` above a
//! string is decided on a finite materialization: the explicit members above
//! it, the prefixes leading to them, and the one non-DNR child of each such
//! prefix. A DNR string has at most one non-DNR child, so for parameters at
//! least 2 nothing else can contribute.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bushy::{big_decision, BigDecision, BoundedString, SmallnessCertificate, StringSet};
use crate::machine::{asm, diagonal, encode_program, eval_with, smn, Instruction, ProgramIndex};
use crate::order::OrderFunction;
use crate::{nat, Error, Nat, Result};

/// `q(sigma, e, k)`: relative to an oracle extending `sigma`, computes
/// `Phi_e(q(sigma, e, k))`; diverges on oracles that disagree with `sigma`.
///
/// Built as `smn(G, (G,))` where `G` checks the oracle against `sigma`,
/// recomputes its own specialization `smn(R1, (R1,))` and calls `e` on it.
/// The decoded program carries the oracle checks. `k` is kept as a dead
/// constant so that different parameters give different indices.
pub fn query_program(sigma: &BoundedString, e: u64, k: u64) -> ProgramIndex {
    let mut p = asm();
    for (i, &a) in sigma.0.iter().enumerate() {
        let ok = p.label();
        p.emit(Instruction::constant(3, i as u64))
            .emit(Instruction::query(3, 4))
            .emit(Instruction::constant(5, u64::from(a)))
            .jump_eq(4, 5, ok)
            .hang();
        p.bind(ok);
    }
    p.emit(Instruction::constant(6, k))
        .emit(Instruction::specialize(1, 1, 7))
        .emit(Instruction::constant(8, e))
        .emit(Instruction::call(8, 7, 0));
    let g = encode_program(&p.finish());
    smn(&g, std::slice::from_ref(&g.0))
}

fn strings_of_length(h: &OrderFunction, n: u64, cap: u128) -> Result<Vec<BoundedString>> {
    let mut count: u128 = 1;
    let bounds: Vec<u64> = (0..n).map(|i| h.small(i)).collect::<Result<_>>()?;
    for &b in &bounds {
        count = count.saturating_mul(u128::from(b));
    }
    if count > cap {
        return Err(Error::CapExceeded { estimate: count, cap });
    }
    let mut out = vec![BoundedString::empty()];
    for &b in &bounds {
        out = out
            .iter()
            .flat_map(|s| (0..b).map(move |a| s.child(a as u32)))
            .collect();
    }
    Ok(out)
}

/// `pi(n) = max { q(sigma, e, k) : sigma in h^n, e, k <= n }`.
pub fn compute_pi(h: &OrderFunction, n: u64, cap: u128) -> Result<Nat> {
    let per = u128::from(n + 1).pow(2);
    let strings = strings_of_length(h, n, cap / per.max(1))?;
    let mut best = nat(0);
    for sigma in &strings {
        for e in 0..=n {
            for k in 0..=n {
                let q = query_program(sigma, e, k).0;
                if q > best {
                    best = q;
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct ForcingConfig {
    pub h: OrderFunction,
    pub g: OrderFunction,
    pub stages: u64,
    pub oracle_budget: u64,
    /// Levels above the working string whose extensions are examined.
    pub window: usize,
    /// Largest window (in strings) a stage may enumerate.
    pub universe_cap: usize,
    /// Largest parameter space `compute_pi` may enumerate.
    pub pi_cap: u128,
}

impl ForcingConfig {
    pub fn new(h: OrderFunction, g: OrderFunction, stages: u64, oracle_budget: u64) -> Self {
        ForcingConfig {
            h,
            g,
            stages,
            oracle_budget,
            window: 1,
            universe_cap: 1 << 16,
            pi_cap: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Branch {
    /// Even stage: the condition was extended into a big set on which
    /// `Phi_e` converges at `x = q(sigma, e, k)` to `value < g(x)`.
    Forced { value: u64 },
    /// Even stage: every such set was small, so it joined the bad set.
    Avoided,
    /// Odd stage: the oracle was extended to make `phi_e^f(e)` converge.
    JumpIn,
    /// Odd stage: the convergence set was small and joined the bad set.
    JumpOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: u64,
    pub e: u64,
    pub branch: Branch,
    /// `h(|f_s|)`, the smallness parameter the stage starts from.
    pub parameter: u64,
    pub sigma: BoundedString,
    pub condition: BoundedString,
    /// The query index `q(sigma, e, k)` at even stages.
    #[serde(with = "crate::natser::opt")]
    pub query: Option<Nat>,
    pub added: usize,
    pub bad_set_size: usize,
    /// `h(|f_{s+1}|)`.
    pub new_parameter: u64,
    pub certificate_ok: bool,
}

/// The run: the final condition and bad set, the per-stage transcript and
/// the condition/bad-set pair at every stage for post-hoc checking.
#[derive(Debug, Clone, Serialize)]
pub struct ForcingState {
    pub stage: u64,
    pub condition: BoundedString,
    /// Explicit part of the bad set; the non-DNR strings are implicit.
    pub bad_set: StringSet,
    pub parameter: u64,
    #[serde(skip)]
    pub certificate: SmallnessCertificate,
    pub transcript: Vec<StageRecord>,
    #[serde(skip)]
    pub history: Vec<(BoundedString, StringSet)>,
    pub label: String,
    #[serde(skip)]
    pub oracle_budget: u64,
    #[serde(skip)]
    pub h: Option<OrderFunction>,
}

struct BadSet<'a> {
    explicit: &'a StringSet,
    budget: u64,
    h: &'a OrderFunction,
}

fn diag_small(i: u64, budget: u64) -> Option<u64> {
    if budget == 0 {
        return None;
    }
    diagonal(&nat(i), budget).and_then(|v| v.to_u64())
}

impl BadSet<'_> {
    fn non_dnr(&self, t: &BoundedString) -> bool {
        t.0.iter()
            .enumerate()
            .any(|(i, &a)| diag_small(i as u64, self.budget) == Some(u64::from(a)))
    }

    /// The part of the bad set that decides bigness above `rho`.
    fn materialize(&self, rho: &BoundedString) -> Result<StringSet> {
        let mut out = StringSet::new();
        if self.non_dnr(rho) {
            out.insert(rho.clone());
            return Ok(out);
        }
        let mut trie = StringSet::new();
        trie.insert(rho.clone());
        for b in self.explicit.iter().filter(|b| rho.is_prefix_of(b)) {
            out.insert(b.clone());
            for len in rho.len()..b.len() {
                trie.insert(b.prefix(len));
            }
        }
        for t in trie.iter() {
            if self.non_dnr(t) {
                out.insert(t.clone());
                continue;
            }
            if let Some(bad) = diag_small(t.len() as u64, self.budget) {
                if bad < self.h.small(t.len() as u64)? {
                    out.insert(t.child(bad as u32));
                }
            }
        }
        Ok(out)
    }

    fn decide(&self, rho: &BoundedString, k: u64) -> Result<BigDecision> {
        let k = u32::try_from(k).map_err(|_| Error::invalid("parameter too large"))?;
        big_decision(&self.materialize(rho)?, k, rho, self.h)
    }

    fn big_above(&self, rho: &BoundedString, k: u64) -> Result<bool> {
        Ok(self.decide(rho, k)?.is_big())
    }
}

/// Extends `from` to length `len` through strings where the bad set is
/// k-small, taking the least admissible entry each time.
fn extend(bad: &BadSet<'_>, from: &BoundedString, len: usize, k: u64) -> Result<BoundedString> {
    let mut rho = from.clone();
    while rho.len() < len {
        let width = bad.h.small(rho.len() as u64)?;
        let mut next = None;
        for a in 0..width {
            let c = rho.child(a as u32);
            if !bad.big_above(&c, k)? {
                next = Some(c);
                break;
            }
        }
        rho = next.ok_or_else(|| {
            Error::InvariantBreach(format!("every child of {rho} is {k}-big for the bad set"))
        })?;
    }
    Ok(rho)
}

/// `sigma` and its extensions up to `depth` more entries.
fn window(h: &OrderFunction, sigma: &BoundedString, depth: usize, cap: usize) -> Result<Vec<BoundedString>> {
    let mut out = vec![sigma.clone()];
    let mut level = vec![sigma.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &level {
            for a in 0..h.small(t.len() as u64)? {
                next.push(t.child(a as u32));
            }
            if out.len() + next.len() > cap {
                return Err(Error::CapExceeded {
                    estimate: (out.len() + next.len()) as u128,
                    cap: cap as u128,
                });
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    Ok(out)
}

fn relative_value(e: u64, input: &Nat, tau: &BoundedString, budget: u64) -> Option<Nat> {
    if budget == 0 {
        return None;
    }
    let oracle: Vec<Nat> = tau.0.iter().map(|&a| nat(u64::from(a))).collect();
    eval_with(&ProgramIndex::from(e), std::slice::from_ref(input), budget, Some(&oracle))
        .value()
        .cloned()
}

fn least_outside(bad: &BadSet<'_>, set: &StringSet, k: u64) -> Result<BoundedString> {
    let mut members: Vec<&BoundedString> = set.iter().collect();
    members.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    for t in members {
        if !bad.big_above(t, k)? {
            return Ok(t.clone());
        }
    }
    Err(Error::InvariantBreach("a big set lies inside the closure of a small one".into()))
}

fn g_of_pi(cfg: &ForcingConfig, n: u64) -> Result<Nat> {
    match &cfg.g {
        OrderFunction::Const(c) => Ok(c.clone()),
        g => g.value(&compute_pi(&cfg.h, n, cfg.pi_cap)?),
    }
}

fn certify(bad: &BadSet<'_>, f: &BoundedString) -> Result<(u64, SmallnessCertificate, bool)> {
    let k = bad.h.small(f.len() as u64)?;
    match bad.decide(f, k)? {
        BigDecision::Small(cert) => {
            let ok = cert.check(&bad.materialize(f)?);
            Ok((k, cert, ok))
        }
        BigDecision::Big(_) => Err(Error::InvariantBreach(format!(
            "bad set is {k}-big above the condition {f}"
        ))),
    }
}

/// Runs `cfg.stages` stages from the empty condition.
pub fn forcing_run(cfg: &ForcingConfig) -> Result<ForcingState> {
    if cfg.h.small(0)? < 2 {
        return Err(Error::invalid("h(0) must be at least 2"));
    }
    let label = format!(
        "approximation at budget {} (window {})",
        cfg.oracle_budget, cfg.window
    );
    let mut f = BoundedString::empty();
    let mut explicit = StringSet::new();
    let (mut parameter, mut certificate, ok) = certify(
        &BadSet { explicit: &explicit, budget: cfg.oracle_budget, h: &cfg.h },
        &f,
    )?;
    if !ok {
        return Err(Error::InvariantBreach("initial certificate rejected".into()));
    }
    let mut history = vec![(f.clone(), explicit.clone())];
    let mut transcript = Vec::new();
    for s in 0..cfg.stages {
        let e = s / 2;
        let k = parameter;
        let bad = BadSet { explicit: &explicit, budget: cfg.oracle_budget, h: &cfg.h };
        let (branch, sigma, next, added, query) = if s % 2 == 0 {
            let floor = (f.len() as u64).max(k).max(e);
            let mut n = floor;
            loop {
                let need = g_of_pi(cfg, n)? * nat(k) + nat(k);
                if cfg.h.at(n)? >= need {
                    break;
                }
                n += 1;
                if n > floor + 100_000 {
                    return Err(Error::HorizonTooSmall(format!(
                        "h never reaches k(g(pi(n)) + 1) above {floor}"
                    )));
                }
            }
            let sigma = extend(&bad, &f, n as usize, k)?;
            let x = query_program(&sigma, e, k);
            let gx = cfg.g.value(&x.0)?;
            let mut groups: BTreeMap<Nat, StringSet> = BTreeMap::new();
            for tau in window(&cfg.h, &sigma, cfg.window, cfg.universe_cap)? {
                if let Some(v) = relative_value(e, &x.0, &tau, cfg.oracle_budget) {
                    groups.entry(v).or_default().insert(tau);
                }
            }
            let kk = u32::try_from(k).map_err(|_| Error::invalid("parameter too large"))?;
            let mut found = None;
            for (v, set) in &groups {
                if big_decision(set, kk, &sigma, &cfg.h)?.is_big() {
                    found = Some(v.clone());
                    break;
                }
            }
            match found.filter(|v| *v < gx) {
                Some(v) => {
                    let tau = least_outside(&bad, &groups[&v], k)?;
                    let value = v.to_u64().expect("below g(x)");
                    (Branch::Forced { value }, sigma, tau, StringSet::new(), Some(x.0))
                }
                None => {
                    let c: StringSet = groups
                        .range(..gx)
                        .flat_map(|(_, set)| set.iter().cloned())
                        .collect();
                    (Branch::Avoided, sigma.clone(), sigma, c, Some(x.0))
                }
            }
        } else {
            let mut len = f.len() as u64;
            while cfg.h.small(len)? < 2 * k {
                len += 1;
            }
            let sigma = extend(&bad, &f, len as usize, k)?;
            let input = nat(e);
            let converging: StringSet = window(&cfg.h, &sigma, cfg.window, cfg.universe_cap)?
                .into_iter()
                .filter(|tau| relative_value(e, &input, tau, cfg.oracle_budget).is_some())
                .collect();
            let kk = u32::try_from(k).map_err(|_| Error::invalid("parameter too large"))?;
            if big_decision(&converging, kk, &sigma, &cfg.h)?.is_big() {
                let tau = least_outside(&bad, &converging, k)?;
                (Branch::JumpIn, sigma, tau, StringSet::new(), None)
            } else {
                (Branch::JumpOut, sigma.clone(), sigma, converging, None)
            }
        };
        if !f.is_prefix_of(&next) {
            return Err(Error::InvariantBreach(format!("{next} does not extend {f}")));
        }
        let grown = explicit.union(&added);
        let bad = BadSet { explicit: &grown, budget: cfg.oracle_budget, h: &cfg.h };
        let (new_parameter, cert, ok) = certify(&bad, &next)?;
        if !ok {
            return Err(Error::InvariantBreach(format!("certificate rejected at stage {s}")));
        }
        transcript.push(StageRecord {
            stage: s,
            e,
            branch,
            parameter: k,
            sigma,
            condition: next.clone(),
            query,
            added: added.len(),
            bad_set_size: grown.len(),
            new_parameter,
            certificate_ok: ok,
        });
        f = next;
        explicit = grown;
        parameter = new_parameter;
        certificate = cert;
        history.push((f.clone(), explicit.clone()));
    }
    Ok(ForcingState {
        stage: cfg.stages,
        condition: f,
        bad_set: explicit,
        parameter,
        certificate,
        transcript,
        history,
        label,
        oracle_budget: cfg.oracle_budget,
        h: Some(cfg.h.clone()),
    })
}

impl ForcingState {
    /// Re-checks every recorded stage from scratch: conditions extend each
    /// other, bad sets only grow, and each bad set is `h(|f_s|)`-small above
    /// `f_s` by a fresh bigness decision whose certificate checks out.
    pub fn verify(&self) -> Result<bool> {
        let h = self.h.as_ref().ok_or_else(|| Error::invalid("state carries no bound"))?;
        for w in self.history.windows(2) {
            if !w[0].0.is_prefix_of(&w[1].0) || !w[0].1.is_subset(&w[1].1) {
                return Ok(false);
            }
        }
        for (f, explicit) in &self.history {
            let bad = BadSet { explicit, budget: self.oracle_budget, h };
            let k = h.small(f.len() as u64)?;
            let set = bad.materialize(f)?;
            match big_decision(&set, u32::try_from(k).unwrap_or(u32::MAX), f, h)? {
                BigDecision::Small(cert) if cert.check(&set) => {}
                _ => return Ok(false),
            }
            if !f.respects(h)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
