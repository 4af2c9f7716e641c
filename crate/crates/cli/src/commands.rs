use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;
use snr_core::bushy::{verify_closure, verify_closure_random, verify_smallness_union, verify_smallness_union_random};
use snr_core::immunity::{
    check_card, ci_violations, defeat_ci_numbering, ei_witness_numbering, schnorr_layer, Numbering, SetPredicate,
};
use snr_core::pandemic::{build_pandemic_numbering, defeat_pandemic_set, endemic_check, BoundedNumbering, PandemicNumbering};
use snr_core::reductions::{
    avoid_multiple, dnr_to_snpr_given_g, dnr_to_snpr_given_h, forcing_run, io_match_construct, table_program,
    ForcingConfig,
};
use snr_core::{encode_program, eval, eval_with, nat, order_validate, FunctionOracle, Nat, OrderFunction, ProgramIndex};

use crate::report::Report;
use crate::{inputs, BuildNumbering, CheckImmunity, CheckPandemic, CliError, Construction, Eval, Lemma, RunReduction};
use crate::{SimulateForcing, Theorem, VerifyLemmas};

type Out = Result<Report, CliError>;

/// Agreements kept in a report; the counts are always complete.
const SHOWN: usize = 20;

fn bound_of(g: &OrderFunction) -> impl Fn(&Nat) -> u64 + Send + Sync + 'static {
    let g = g.clone();
    move |x| g.value(x).ok().and_then(|v| v.to_u64()).unwrap_or(u64::MAX)
}

fn set_text(s: &BTreeSet<u64>) -> String {
    let items: Vec<String> = s.iter().map(u64::to_string).collect();
    format!("{{{}}}", items.join(","))
}

pub fn verify_lemmas(a: &VerifyLemmas) -> Out {
    let spec = a.h.clone().unwrap_or_else(|| format!("const:{}", a.alphabet));
    let h = inputs::order(&spec)?;
    let m = a.mmax.unwrap_or(a.nmax);
    let mut rep = Report::new("verify-lemmas", a);
    let mut reports = Vec::new();
    if matches!(a.lemma, Lemma::Union | Lemma::Both) {
        reports.push(if a.random == 0 {
            verify_smallness_union(&h, a.maxlen, a.nmax, m, a.cap)?
        } else {
            verify_smallness_union_random(&h, a.maxlen, a.nmax, m, a.random, a.seed)?
        });
    }
    if matches!(a.lemma, Lemma::Closure | Lemma::Both) {
        reports.push(if a.random == 0 {
            verify_closure(&h, a.maxlen, a.nmax, a.cap)?
        } else {
            verify_closure_random(&h, a.maxlen, a.nmax, a.random, a.seed)?
        });
    }
    for r in &reports {
        let detail = match &r.counterexample {
            None => format!("{} instances, {} with the premise, no counterexample", r.checked_count, r.premise_count),
            Some(c) => format!("counterexample {c:?}"),
        };
        rep.check(r.lemma, r.passed(), detail);
    }
    Ok(rep.result(json!({
        "h": spec,
        "mmax": m,
        "mode": if a.random == 0 { "exhaustive".to_string() } else { format!("{} random instances", a.random) },
        "reports": reports,
    })))
}

pub fn run_reduction(a: &RunReduction) -> Out {
    match a.theorem {
        Theorem::One => theorem_one(a),
        Theorem::Two => theorem_two(a),
        Theorem::Avoid => avoid(a),
        Theorem::IoMatch => io_match(a),
    }
}

#[derive(Serialize)]
struct Agreement {
    seed: u64,
    e: u64,
    n: u64,
    value: String,
    identity_holds: bool,
}

fn theorem_two(a: &RunReduction) -> Out {
    let g = inputs::order(&a.g)?;
    let built = dnr_to_snpr_given_g(&g, a.horizon)?;
    let mut rep = Report::new("run-reduction", a);
    let mut bound_failure = None;
    let mut agreements = Vec::new();
    for seed in a.seed..a.seed + a.oracles {
        let f = FunctionOracle::random_bounded(seed, bound_of(&g));
        for n in 0..=a.horizon {
            let j = built.reduction.apply_u64(&f, n)?;
            let h = built.h.at(n)?;
            if j >= h && bound_failure.is_none() {
                bound_failure = Some(format!("seed {seed}: j({n}) = {j} is not below h({n}) = {h}"));
            }
            for c in built.collisions(&f, n, a.budget)? {
                agreements.push(Agreement {
                    seed,
                    e: c.e,
                    n,
                    value: c.value.to_string(),
                    identity_holds: c.identity_holds,
                });
            }
        }
    }
    let broken = agreements.iter().filter(|c| !c.identity_holds).count();
    rep.check(
        "output bound",
        bound_failure.is_none(),
        bound_failure.unwrap_or_else(|| format!("j(n) < h(n) for n <= {} on {} oracles", a.horizon, a.oracles)),
    );
    rep.check(
        "contrapositive",
        broken == 0,
        format!(
            "{} agreements j(n) = phi_e(n) with e < n; {broken} without f(r(e,n)) = phi_r(e,n)(r(e,n))",
            agreements.len()
        ),
    );
    let h_order = order_validate(&built.h, a.horizon);
    rep.check("h is an order", h_order.is_ok(), h_order.as_ref().map_or_else(ToString::to_string, |r| format!("{r:?}")));
    let h_values: Vec<String> = (0..=a.horizon).map(|n| built.h.at(n).map(|v| v.to_string())).collect::<Result<_, _>>()?;
    let total = agreements.len();
    agreements.truncate(SHOWN);
    Ok(rep.result(json!({
        "reduction": built.reduction.source,
        "parameters": built.reduction.parameters,
        "h": h_values,
        "agreements": total,
        "first_agreements": agreements,
    })))
}

fn theorem_one(a: &RunReduction) -> Out {
    let h = inputs::order(&a.h)?;
    let built = dnr_to_snpr_given_h(&h, a.horizon)?;
    let mut rep = Report::new("run-reduction", a);
    let phi: Vec<Vec<Option<Nat>>> = (0..=a.horizon)
        .map(|x| {
            let n = built.interval_of(x).map_or(0, |i| i.n);
            (0..n).map(|e| eval(&ProgramIndex::from(e), &[nat(x)], a.budget).value().cloned()).collect()
        })
        .collect();
    let mut bound_failure = None;
    let mut avoid_failure = None;
    let mut points = 0u64;
    for seed in a.seed..a.seed + a.oracles {
        let f = FunctionOracle::random_dnr(seed, a.oracle_budget, bound_of(&built.g));
        for iv in &built.intervals {
            for x in iv.start..iv.end {
                let out = built.reduction.apply_u64(&f, x)?;
                let hx = h.at(x)?;
                if out >= hx && bound_failure.is_none() {
                    bound_failure = Some(format!("seed {seed}: F({x}) = {out} is not below h({x}) = {hx}"));
                }
                for (e, v) in phi[x as usize].iter().enumerate() {
                    if v.as_ref() == Some(&out) && avoid_failure.is_none() {
                        avoid_failure = Some(format!("seed {seed}: F({x}) = phi_{e}({x}) = {out}"));
                    }
                }
                points += 1;
            }
        }
    }
    rep.check(
        "output bound",
        bound_failure.is_none(),
        bound_failure.unwrap_or_else(|| format!("F(x) < h(x) at {points} points")),
    );
    rep.check(
        "avoidance",
        avoid_failure.is_none(),
        avoid_failure.unwrap_or_else(|| format!("F(x) differs from every phi_e(x), e below the interval's n, within {} steps", a.budget)),
    );
    let g_order = order_validate(&built.g, a.horizon);
    rep.check("g is an order", g_order.is_ok(), g_order.as_ref().map_or_else(ToString::to_string, |r| format!("{r:?}")));
    Ok(rep.result(json!({
        "reduction": built.reduction.source,
        "parameters": built.reduction.parameters,
        "intervals": built.intervals,
        "g": built.g.to_string(),
    })))
}

fn avoid(a: &RunReduction) -> Out {
    let red = avoid_multiple(a.a, a.c)?;
    let exp = u32::try_from(a.c).map_err(|_| CliError::usage("c is too large"))?;
    let limit = a.a.checked_pow(exp).ok_or_else(|| CliError::usage("a^c does not fit 64 bits"))?;
    let mut rep = Report::new("run-reduction", a);
    let phi: Vec<Vec<Option<Nat>>> = (0..=a.horizon)
        .map(|e| (0..a.c).map(|x| eval(&ProgramIndex::from(e), &[nat(x)], a.budget).value().cloned()).collect())
        .collect();
    let mut bound_failure = None;
    let mut avoid_failure = None;
    let mut sample = Vec::new();
    let alphabet = a.a;
    for seed in a.seed..a.seed + a.oracles {
        let f = FunctionOracle::random_dnr(seed, a.oracle_budget, move |_| alphabet);
        for e in 0..=a.horizon {
            let out = red.apply_u64(&f, e)?;
            if seed == a.seed {
                sample.push(out.to_string());
            }
            if out >= nat(limit) && bound_failure.is_none() {
                bound_failure = Some(format!("seed {seed}: output {out} for e = {e} is not below {limit}"));
            }
            for (x, v) in phi[e as usize].iter().enumerate() {
                if v.as_ref() == Some(&out) && avoid_failure.is_none() {
                    avoid_failure = Some(format!("seed {seed}: output for e = {e} equals phi_{e}({x}) = {out}"));
                }
            }
        }
    }
    rep.check(
        "output bound",
        bound_failure.is_none(),
        bound_failure.unwrap_or_else(|| format!("every output is below a^c = {limit}")),
    );
    rep.check(
        "avoidance",
        avoid_failure.is_none(),
        avoid_failure.unwrap_or_else(|| format!("no output equals phi_e(x), x < {}, within {} steps", a.c, a.budget)),
    );
    Ok(rep.result(json!({
        "reduction": red.source,
        "parameters": red.parameters,
        "outputs_first_oracle": sample,
    })))
}

fn io_match(a: &RunReduction) -> Out {
    let table: Vec<Nat> = match &a.table {
        Some(list) => inputs::naturals(list)?,
        None => {
            let f = FunctionOracle::random_bounded(a.seed, |_| 4);
            (0..a.table_len).map(|x| f.query_u64(x)).collect()
        }
    };
    let psi = encode_program(&table_program(&table));
    let hesc = inputs::function(&a.hesc)?;
    let trace = io_match_construct(&table, &psi, &hesc, a.stages, a.max_stage)?;
    let mut rep = Report::new("run-reduction", a);
    rep.check("domain grows", trace.domain_strictly_grows(), "dom(j_n) strictly increases at every stage");
    let premised: Vec<_> = trace.stages.iter().filter(|s| s.premise).collect();
    let short: Vec<u64> = premised.iter().filter(|s| s.property_holds() == Some(false)).map(|s| s.n).collect();
    rep.check(
        "matches",
        short.is_empty(),
        format!(
            "{} stages with hEsc(n) >= g(n); stages with fewer than n+1 agreements: {short:?}",
            premised.len()
        ),
    );
    let table_text: Vec<String> = table.iter().map(ToString::to_string).collect();
    let j: Vec<(u64, String)> = trace.j.iter().map(|(x, v)| (*x, v.to_string())).collect();
    Ok(rep.result(json!({
        "table": table_text,
        "psi": psi,
        "trace": trace,
        "final_j": j,
    })))
}

#[derive(Serialize)]
struct Entry {
    e: u64,
    set: String,
    card: u64,
}

fn entries(d: &dyn Numbering, horizon: u64) -> Result<Vec<Entry>, CliError> {
    (0..=horizon)
        .map(|e| {
            let s = d.members(e)?;
            Ok(Entry {
                e,
                card: s.len() as u64,
                set: set_text(&s),
            })
        })
        .collect()
}

pub fn build_numbering(a: &BuildNumbering) -> Out {
    let h = inputs::order(&a.h)?;
    let mut rep = Report::new("build-numbering", a);
    match a.construction {
        Construction::DefeatCi => {
            let r = inputs::predicate(&a.r)?;
            let d = defeat_ci_numbering(&r, &h, a.horizon, a.search_cap)?;
            let found = ci_violations(&r, &h, &d, a.horizon)?;
            let got: BTreeSet<u64> = found.indices().into_iter().collect();
            let missed: Vec<u64> = (0..=a.horizon).step_by(2).filter(|e| !got.contains(e)).collect();
            rep.check("defeats every even index", missed.is_empty(), format!("even indices not defeated: {missed:?}"));
            let card = check_card(&d, a.horizon)?;
            rep.check("card is exact", card.is_none(), format!("first mismatch: {card:?}"));
            Ok(rep.result(json!({
                "numbering": d.describe(),
                "entries": entries(&d, a.horizon)?,
                "violations": found,
            })))
        }
        Construction::EiWitness => {
            let g = inputs::function(&a.g)?;
            let d = ei_witness_numbering(&h, &g, a.horizon, a.search_cap)?;
            let mut over = Vec::new();
            let mut rows = Vec::new();
            for (k, &(e, dd)) in d.pairs.iter().enumerate() {
                let idx = 2 * k as u64;
                let card = d.card(idx)?;
                let bound = d.bound(idx).expect("even index within the horizon");
                if card > bound + 1 {
                    over.push(idx);
                }
                rows.push(json!({ "index": idx, "program": e, "d": dd, "card": card, "bound": bound }));
            }
            rep.check(
                "truncation",
                over.is_empty(),
                format!("entries W_(e,g(d)) # h(d) hold at most h(d) + 1 entrants; larger: {over:?}"),
            );
            Ok(rep.result(json!({
                "numbering": d.describe(),
                "pairs": rows,
                "entries": entries(&d, a.horizon)?,
            })))
        }
        Construction::Pandemic => {
            let path = a.family.as_ref().ok_or_else(|| CliError::usage("--construction pandemic needs --family"))?;
            let family = inputs::family(path)?;
            let roles: Vec<&String> = family.iter().map(|(r, _)| r).collect();
            let f = inputs::function(&a.f)?;
            let n = build_pandemic_numbering(f, &h, family.iter().map(|(_, p)| p.clone()).collect())?;
            let rows = n.frontier(a.horizon, a.frontier_cap)?;
            let bad: Vec<(u64, u64)> = rows.iter().filter(|r| !r.guarantee_holds()).map(|r| (r.e, r.k)).collect();
            rep.check(
                "full-entry guarantee",
                bad.is_empty(),
                format!("entry <e,k> is full exactly when f(e) >= t_k(e); failing (e, k): {bad:?}"),
            );
            let listed: Vec<Entry> = rows
                .iter()
                .map(|r| {
                    let z = PandemicNumbering::index(r.e, r.k);
                    let s = n.members(z)?;
                    Ok(Entry {
                        e: z,
                        card: s.len() as u64,
                        set: set_text(&s),
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok(rep.result(json!({
                "roles": roles,
                "family": family.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
                "entries": listed,
                "frontier": rows,
            })))
        }
    }
}

pub fn check_immunity(a: &CheckImmunity) -> Out {
    let d = inputs::numbering(&a.numbering)?;
    let r = inputs::predicate(&a.r)?;
    let h = inputs::order(&a.h)?;
    let mut rep = Report::new("check-immunity", a);
    let found = ci_violations(&r, &h, d.as_ref(), a.horizon)?;
    let card = check_card(d.as_ref(), a.horizon)?;
    rep.check("card is exact", card.is_none(), format!("first mismatch: {card:?}"));
    let layer = match a.schnorr {
        Some(c) => {
            let layer = schnorr_layer(d.as_ref(), c, a.horizon)?;
            rep.check("schnorr bound", layer.holds, format!("{} <= {}", layer.bound, layer.limit));
            Some(layer)
        }
        None => None,
    };
    if a.expect_clean {
        rep.check(
            "no violations",
            found.violations.is_empty(),
            format!("violating indices: {:?}", found.indices()),
        );
    }
    Ok(rep.result(json!({
        "numbering": d.describe(),
        "violations": found,
        "schnorr": layer,
    })))
}

/// A numbering whose declared bound is the largest member of each entry.
struct MaxBound<'a>(&'a dyn Numbering);

impl Numbering for MaxBound<'_> {
    fn members(&self, e: u64) -> snr_core::Result<BTreeSet<u64>> {
        self.0.members(e)
    }
    fn card(&self, e: u64) -> snr_core::Result<u64> {
        self.0.card(e)
    }
    fn describe(&self) -> String {
        self.0.describe()
    }
}

impl BoundedNumbering for MaxBound<'_> {
    fn bound(&self, e: u64) -> snr_core::Result<u64> {
        Ok(self.0.members(e)?.last().copied().unwrap_or(0))
    }
}

pub fn check_pandemic(a: &CheckPandemic) -> Out {
    let h = inputs::order(&a.h)?;
    let mut rep = Report::new("check-pandemic", a);
    if let Some(path) = &a.family {
        let family = inputs::family(path)?;
        let f = inputs::function(&a.f)?;
        let n = build_pandemic_numbering(f, &h, family.iter().map(|(_, p)| p.clone()).collect())?;
        let mut per_set = Vec::new();
        for (k, (role, index)) in family.iter().enumerate() {
            let r = SetPredicate::Program {
                index: index.clone(),
                budget: a.search_cap,
            };
            let mut witnesses = Vec::new();
            for e in 0..=a.horizon {
                let z = PandemicNumbering::index(e, k as u64);
                let s = n.members(z)?;
                if s.len() as u64 >= h.small(z)? && r.contains_all(&s)? {
                    witnesses.push(json!({ "e": e, "index": z, "set": set_text(&s) }));
                }
            }
            rep.check(
                &format!("endemic to {role}"),
                witnesses.len() as u64 >= a.min_witnesses,
                format!("{} full entries inside the set, {} required", witnesses.len(), a.min_witnesses),
            );
            per_set.push(json!({ "role": role, "index": index, "witnesses": witnesses }));
        }
        return Ok(rep.result(json!({ "sets": per_set })));
    }
    let path = a
        .numbering
        .as_ref()
        .ok_or_else(|| CliError::usage("give --numbering or --family"))?;
    let d = inputs::numbering(path)?;
    if a.defeat {
        let bounded = MaxBound(d.as_ref());
        let out = defeat_pandemic_set(&bounded, &h, a.horizon, a.search_cap)?;
        let found = endemic_check(d.as_ref(), &h, &out.predicate(), a.horizon)?;
        let above: Vec<u64> = found.indices().into_iter().filter(|&e| e >= out.stem).collect();
        rep.check(
            "defeated",
            above.is_empty() && out.cutoff.is_none(),
            match &out.cutoff {
                Some(why) => why.clone(),
                None => format!("endemic entries at or above the stem {}: {above:?}", out.stem),
            },
        );
        return Ok(rep.result(json!({ "numbering": d.describe(), "defeat": out, "endemic": found })));
    }
    let r = inputs::predicate(&a.r)?;
    let found = endemic_check(d.as_ref(), &h, &r, a.horizon)?;
    rep.check(
        "endemic",
        found.witnesses.len() as u64 >= a.min_witnesses,
        format!("{} entries with |D_e| >= h(e) inside the set, {} required", found.witnesses.len(), a.min_witnesses),
    );
    Ok(rep.result(json!({ "numbering": d.describe(), "endemic": found })))
}

pub fn simulate_forcing(a: &SimulateForcing) -> Out {
    let mut cfg = ForcingConfig::new(inputs::order(&a.h)?, inputs::order(&a.g)?, a.stages, a.oracle_budget);
    cfg.window = a.window;
    cfg.universe_cap = a.universe_cap;
    let run = forcing_run(&cfg)?;
    let mut rep = Report::new("simulate-forcing", a);
    let failed: Vec<u64> = run.transcript.iter().filter(|r| !r.certificate_ok).map(|r| r.stage).collect();
    rep.check("stage certificates", failed.is_empty(), format!("stages whose certificate failed: {failed:?}"));
    rep.check(
        "post-hoc verification",
        run.verify()?,
        "conditions extend, bad sets grow, each bad set re-decided small with a checked certificate",
    );
    Ok(rep.result(run))
}

pub fn eval_program(a: &Eval) -> Out {
    let index = match (&a.index, &a.program) {
        (Some(i), _) => inputs::program_ref(i, None)?,
        (None, Some(p)) => inputs::program_ref(&p.to_string_lossy(), None)?,
        (None, None) => return Err(CliError::usage("give --index or --program")),
    };
    let args = inputs::naturals(&a.input)?;
    let oracle = a.oracle.as_deref().map(inputs::naturals).transpose()?;
    let out = eval_with(&index, &args, a.budget, oracle.as_deref());
    let rep = Report::new("eval", a);
    Ok(rep.result(json!({
        "index": index,
        "program": index.program().to_string(),
        "outcome": out,
    })))
}
