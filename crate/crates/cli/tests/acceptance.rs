//! The acceptance suite: one line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snr_core::bushy::{
    big_decision, verify_closure, verify_closure_random, verify_smallness_union, verify_smallness_union_random,
    BigDecision, BoundedString, DEFAULT_CAP,
};
use snr_core::immunity::{ci_violations, defeat_ci_numbering, schnorr_layer, FnNumbering, Numbering, SetPredicate};
use snr_core::machine::{programs, smn_overhead};
use snr_core::pandemic::{build_pandemic_numbering, defeat_pandemic_set, endemic_check, FrontierRow, WithBound};
use snr_core::reductions::{
    avoid_multiple, dnr_to_snpr_given_g, dnr_to_snpr_given_h, forcing_run, io_match_construct, projection_index,
    table_program, ForcingConfig,
};
use snr_core::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: snr_core::Error) -> String {
    e.to_string()
}

fn order(widths: &[u32]) -> OrderFunction {
    OrderFunction::table(widths.iter().map(|&w| nat(u64::from(w))).collect())
}

fn bushy_lemmas() -> Outcome {
    let h2 = OrderFunction::constant(2);
    let h3 = OrderFunction::constant(3);
    let reports = [
        verify_smallness_union(&h2, 2, 3, 3, DEFAULT_CAP).map_err(err)?,
        verify_closure(&h2, 2, 3, DEFAULT_CAP).map_err(err)?,
        verify_smallness_union_random(&h3, 3, 3, 3, 1000, 1).map_err(err)?,
        verify_closure_random(&h3, 3, 3, 1000, 2).map_err(err)?,
    ];
    let mut checked = 0;
    for r in &reports {
        check(r.passed(), || format!("{}: counterexample {:?}", r.lemma, r.counterexample))?;
        checked += r.checked_count;
    }
    Ok(format!("{checked} instances, 0 counterexamples"))
}

fn bigness_oracle() -> Outcome {
    let shapes: [(&[u32], usize); 9] = [
        (&[2, 2], 2),
        (&[3, 2], 2),
        (&[2, 3], 2),
        (&[4], 1),
        (&[6], 1),
        (&[3, 3], 2),
        (&[4, 2], 2),
        (&[2, 4], 2),
        (&[2, 2, 2], 3),
    ];
    let mut checked = 0u64;
    for (widths, max_len) in shapes {
        let h = order(widths);
        let leaf_sets = oracles::LeafSets::build(oracles::universe(widths, max_len), 4);
        let size = leaf_sets.strings.len();
        check(size <= 15, || format!("universe of {size} strings"))?;
        for b in 0u32..(1 << size) {
            let set = leaf_sets.to_set(b);
            for stem in 0..size {
                let sigma = BoundedString(leaf_sets.strings[stem].clone());
                for n in 1..=4 {
                    let want = leaf_sets.big(b, n, stem);
                    let agree = match big_decision(&set, n, &sigma, &h).map_err(err)? {
                        BigDecision::Big(w) => {
                            want && oracles::bushy(&w.nodes, n, &sigma)
                                && oracles::leaves(&w.nodes).iter().all(|l| set.contains(l))
                        }
                        BigDecision::Small(cert) => !want && cert.check(&set),
                    };
                    check(agree, || format!("disagreement on widths {widths:?}, B={set:?}, n={n}, stem={sigma}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (B, n, stem) instances agree"))
}

fn grows(p: &Program) -> bool {
    p.instructions.iter().any(|i| {
        matches!(
            i,
            Instruction::Pair(..) | Instruction::Specialize(..) | Instruction::Call(..)
        )
    })
}

fn machine_laws() -> Outcome {
    for z in 0..=10_000u64 {
        let (x, y) = unpair(&nat(z));
        check(pair(&x, &y) == nat(z), || format!("pair(unpair({z})) != {z}"))?;
    }
    for n in 1..=4usize {
        for m in 0..=1000u64 {
            let t = tuple_decode(n, &nat(m)).map_err(err)?;
            check(tuple_encode(n, &t).map_err(err)? == nat(m), || format!("tuple round trip n={n} m={m}"))?;
        }
    }
    for e in 0..=10_000u64 {
        let idx = ProgramIndex::from(e);
        check(encode_program(&decode_program(&idx)) == idx, || format!("numbering round trip at {e}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut triples = 0;
    let mut halting = 0;
    while triples < 500 {
        let e = ProgramIndex::from(rng.gen_range(0..1_000_000u64));
        let budget = if grows(&decode_program(&e)) { 24 } else { 500 };
        let fixed: Vec<Nat> = (0..rng.gen_range(0..3)).map(|_| nat(rng.gen_range(0..20))).collect();
        let rest: Vec<Nat> = (0..rng.gen_range(0..3)).map(|_| nat(rng.gen_range(0..20))).collect();
        let all: Vec<Nat> = fixed.iter().chain(&rest).cloned().collect();
        let direct = eval(&e, &all, budget);
        let shift = smn_overhead(fixed.len());
        let special = eval(&smn(&e, &fixed), &rest, budget + shift);
        check(direct.value() == special.value(), || format!("s-m-n law fails for e={e}, fixed={fixed:?}, rest={rest:?}"))?;
        halting += usize::from(direct.halted());
        triples += 1;
    }

    let q = fix(&encode_program(&programs::constant_maker()));
    for x in [0u64, 5, 1000] {
        check(eval(&q, &[nat(x)], 10_000).value() == Some(&q.0), || format!("quine {q} fails on input {x}"))?;
    }
    Ok(format!("round trips exact; {triples} s-m-n triples ({halting} halting); quine {} bits", q.0.bits()))
}

fn avoidance() -> Outcome {
    const ORACLES: u64 = 1000;
    let mut applications = 0u64;
    for a in [2u64, 3] {
        for c in [2u64, 3] {
            let red = avoid_multiple(a, c).map_err(err)?;
            let limit = nat(a.pow(c as u32));
            let halts: Vec<Vec<Option<Nat>>> = (0..=50u64)
                .map(|e| (0..c).map(|x| eval(&ProgramIndex::from(e), &[nat(x)], 10_000).value().cloned()).collect())
                .collect();
            for seed in 0..ORACLES {
                let f = FunctionOracle::random_dnr(seed, 20_000, move |_| a);
                for e in 0..=50u64 {
                    let out = red.apply_u64(&f, e).map_err(err)?;
                    check(out < limit, || format!("a={a} c={c} e={e}: output {out} >= {limit}"))?;
                    for (x, v) in halts[e as usize].iter().enumerate() {
                        check(v.as_ref() != Some(&out), || {
                            format!("a={a} c={c} e={e} seed={seed}: output {out} equals phi_e({x})")
                        })?;
                    }
                    applications += 1;
                }
            }
        }
    }
    Ok(format!("{applications} applications, 0 avoidance failures"))
}

fn theorem_two() -> Outcome {
    const N: u64 = 8;
    let top = (1..=N)
        .flat_map(|n| (0..n).map(move |k| projection_index(k, n).0))
        .max()
        .expect("nonempty");
    let g = OrderFunction::Steps {
        cuts: Arc::new(vec![(top, nat(2))]),
        beyond: nat(3),
    };
    let built = dnr_to_snpr_given_g(&g, N).map_err(err)?;
    let mut collisions = 0;
    for seed in 0..1000u64 {
        let bound = g.clone();
        let f = FunctionOracle::random_bounded(seed, move |x| bound.value(x).ok().and_then(|v| v.to_u64()).unwrap_or(2));
        for n in 0..=N {
            let j = built.reduction.apply_u64(&f, n).map_err(err)?;
            let h = built.h.at(n).map_err(err)?;
            check(j <= h, || format!("seed {seed}: j({n}) = {j} exceeds h({n}) = {h}"))?;
            for col in built.collisions(&f, n, 10_000).map_err(err)? {
                check(col.identity_holds, || format!("seed {seed}: collision {col:?} without the identity"))?;
                collisions += 1;
            }
        }
    }
    Ok(format!("1000 oracles, n <= {N}: bound holds, {collisions} collisions all at non-DNR points"))
}

fn theorem_one() -> Outcome {
    const HORIZON: u64 = 200;
    let h = OrderFunction::linear(2, 2);
    let built = dnr_to_snpr_given_h(&h, HORIZON).map_err(err)?;
    order_validate(&built.g, 1000).map_err(err)?;
    let phi: Vec<Vec<Option<Nat>>> = (0..=HORIZON)
        .map(|x| {
            let n = built.interval_of(x).map_or(0, |i| i.n);
            (0..n).map(|e| eval(&ProgramIndex::from(e), &[nat(x)], 10_000).value().cloned()).collect()
        })
        .collect();
    let mut points = 0;
    for seed in 0..20u64 {
        let g = built.g.clone();
        let f = FunctionOracle::random_dnr(seed, 40_000, move |y| g.value(y).ok().and_then(|v| v.to_u64()).unwrap_or(2));
        for iv in &built.intervals {
            for x in iv.start..iv.end {
                let out = built.reduction.apply_u64(&f, x).map_err(err)?;
                let hx = h.at(x).map_err(err)?;
                check(out < hx, || format!("seed {seed}: F({x}) = {out} >= h({x}) = {hx}"))?;
                for (e, v) in phi[x as usize].iter().enumerate() {
                    check(v.as_ref() != Some(&out), || format!("seed {seed}: F({x}) = phi_{e}({x}) = {out}"))?;
                }
                points += 1;
            }
        }
    }
    let shape: Vec<String> = built.intervals.iter().map(|i| format!("n={}:[{},{})", i.n, i.start, i.end)).collect();
    Ok(format!("{points} points over {}; g is an order", shape.join(" ")))
}

fn kms() -> Outcome {
    let escapes: Vec<(&str, FunctionOracle)> = vec![
        ("const 5", FunctionOracle::from_fn("5", |_| nat(5))),
        ("7n+3", FunctionOracle::from_fn("7n+3", |n| n * 7u32 + 3u32)),
        ("20n^2+10", FunctionOracle::from_fn("20n^2+10", |n| n * n * 20u32 + 10u32)),
        ("2^n+40", FunctionOracle::from_fn("2^n+40", |n| (nat(1) << n.to_usize().unwrap_or(64)) + 40u32)),
        ("const 500", FunctionOracle::from_fn("500", |_| nat(500))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut premised = 0;
    let mut failures = Vec::new();
    for t in 0..10 {
        let f: Vec<Nat> = (0..16).map(|_| nat(rng.gen_range(0..4))).collect();
        let psi = encode_program(&table_program(&f));
        for (name, esc) in &escapes {
            let trace = io_match_construct(&f, &psi, esc, 10, 600).map_err(err)?;
            check(trace.domain_strictly_grows(), || format!("table {t}, hEsc {name}: domain did not grow"))?;
            for s in &trace.stages {
                match s.property_holds() {
                    Some(true) => premised += 1,
                    Some(false) => {
                        premised += 1;
                        failures.push(format!(
                            "table {t}, hEsc {name}, n={}: {} agreements (padding at {})",
                            s.n, s.agreements, s.padding
                        ));
                    }
                    None => {}
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{premised} premised stages, all with >= n+1 agreements; domains strictly grow"))
    } else {
        Err(format!("{} of {premised} premised stages short: {}", failures.len(), failures.join("; ")))
    }
}

fn forcing() -> Outcome {
    let cfg = ForcingConfig::new(OrderFunction::linear(2, 2), OrderFunction::constant(2), 6, 2_000);
    let run = forcing_run(&cfg).map_err(err)?;
    check(run.transcript.len() == 6, || format!("{} stages recorded", run.transcript.len()))?;
    check(run.transcript.iter().all(|r| r.certificate_ok), || "a stage certificate failed".into())?;
    check(run.verify().map_err(err)?, || "post hoc verification failed".into())?;
    let branches: Vec<String> = run.transcript.iter().map(|r| format!("{:?}", r.branch)).collect();
    Ok(format!("6 stages re-verified; |f_6| = {}; {}", run.condition.len(), branches.join(", ")))
}

fn segment_numbering(k: u64, m: u64) -> FnNumbering {
    FnNumbering::new(format!("[0, {k}e+{m})"), move |e| (0..k * e + m).collect())
}

fn immunity_and_pandemic() -> Outcome {
    // defeating canonical immunity
    let preds = [SetPredicate::Evens, SetPredicate::Multiples(3), SetPredicate::All];
    let bounds = [OrderFunction::constant(2), OrderFunction::linear(1, 2), OrderFunction::Sqrt { offset: nat(2) }];
    let evens: Vec<u64> = (0..=200).step_by(2).collect();
    for r in &preds {
        for h in &bounds {
            let d = defeat_ci_numbering(r, h, 200, 100_000).map_err(err)?;
            let rep = ci_violations(r, h, &d, 200).map_err(err)?;
            let got: BTreeSet<u64> = rep.indices().into_iter().collect();
            check(evens.iter().all(|e| got.contains(e)), || format!("{r} / {h}: an even index is not defeated"))?;
        }
    }

    // Schnorr layers
    let mut corpus: Vec<FnNumbering> = Vec::new();
    for k in 1..=5 {
        for m in 0..5 {
            corpus.push(segment_numbering(k, m));
        }
    }
    for seed in 0..25u64 {
        corpus.push(FnNumbering::new(format!("random {seed}"), move |e| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 1_000 + e);
            let size = rng.gen_range(0..=3 * e + 2);
            (0..size).map(|i| i * 2 + rng.gen_range(0..2)).collect()
        }));
    }
    let mut conditions = 0;
    for d in &corpus {
        for c in 1..=3 {
            let layer = schnorr_layer(d, c, 60).map_err(err)?;
            check(layer.holds, || format!("{}: c={c} bound {} exceeds {}", d.describe(), layer.bound, layer.limit))?;
            conditions += layer.conditions.len();
        }
    }

    // defeating bounded numberings
    let mut instances = 0;
    for k in 1..=4u64 {
        for (hi, h) in [OrderFunction::linear(1, 2), OrderFunction::table(vec![nat(0), nat(1), nat(3)])]
            .into_iter()
            .enumerate()
        {
            for m in [0u64, 6] {
                if instances == 20 {
                    break;
                }
                let d = WithBound::new(segment_numbering(k, m), move |e| (k * e + m).saturating_sub(1));
                let out = defeat_pandemic_set(&d, &h, 40, 1000).map_err(err)?;
                check(out.cutoff.is_none(), || format!("instance {instances}: {:?}", out.cutoff))?;
                let rep = endemic_check(&d, &h, &out.predicate(), 40).map_err(err)?;
                check(rep.indices().iter().all(|&e| e < out.stem), || {
                    format!("instance {instances} (h#{hi}): endemic witnesses {:?} above stem {}", rep.indices(), out.stem)
                })?;
                instances += 1;
            }
        }
    }
    for seed in 0..4u64 {
        let d = WithBound::new(
            FnNumbering::new(format!("sparse {seed}"), move |e| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed + 100 * e);
                (0..e + 3).map(|_| rng.gen_range(0..10 * e + 10)).collect()
            }),
            |e| 10 * e + 9,
        );
        let h = OrderFunction::linear(1, 2);
        let out = defeat_pandemic_set(&d, &h, 40, 1000).map_err(err)?;
        let rep = endemic_check(&d, &h, &out.predicate(), 40).map_err(err)?;
        check(rep.witnesses.is_empty(), || format!("sparse {seed}: witnesses {:?}", rep.indices()))?;
        instances += 1;
    }

    // pandemic numbering frontier
    let family = vec![
        encode_program(&programs::divisibility_decider(2, 0)),
        encode_program(&programs::divisibility_decider(3, 40)),
        encode_program(&programs::halt_on_evens()),
    ];
    let mut rows = 0;
    let mut full = 0;
    for (slope, h) in [(150u32, OrderFunction::constant(2)), (60, OrderFunction::Sqrt { offset: nat(1) })] {
        let f = FunctionOracle::from_fn(format!("{slope}e"), move |e| e * slope);
        let n = build_pandemic_numbering(f, &h, family.clone()).map_err(err)?;
        let frontier = n.frontier(10, 4000).map_err(err)?;
        let bad: Vec<&FrontierRow> = frontier.iter().filter(|r| !r.guarantee_holds()).collect();
        check(bad.is_empty(), || format!("frontier rows disagree: {bad:?}"))?;
        rows += frontier.len();
        full += frontier.iter().filter(|r| r.full).count();
    }
    Ok(format!(
        "CI defeated at all evens <= 200 (9 pairs); {} Schnorr numberings, {conditions} conditions; \
         {instances} pandemic instances clean; frontier exact on {rows} rows ({full} full)",
        corpus.len()
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_snrw");
    let runs: [&[&str]; 5] = [
        &["verify-lemmas", "--lemma", "union", "--alphabet", "2", "--maxlen", "2", "--nmax", "2", "--random", "50", "--seed", "11"],
        &["simulate-forcing", "--h", "linear:2,2", "--g", "const:2", "--stages", "4", "--oracle-budget", "500", "--seed", "5"],
        &["run-reduction", "--theorem", "avoid", "--a", "3", "--c", "2", "--horizon", "20", "--oracles", "10", "--seed", "9"],
        &["run-reduction", "--theorem", "2", "--g", "const:3", "--horizon", "8", "--oracles", "20", "--seed", "1"],
        &["build-numbering", "--construction", "defeat-ci", "--r", "multiples:3", "--h", "linear:1,2", "--horizon", "30"],
    ];
    for args in runs {
        let bodies: Vec<String> = (0..2)
            .map(|_| {
                let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
                if !out.status.success() {
                    return Err(format!(
                        "`snrw {}` exited with {}: {}",
                        args.join(" "),
                        out.status,
                        String::from_utf8_lossy(&out.stderr)
                    ));
                }
                let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
                Ok(text.lines().skip(1).collect::<Vec<_>>().join("\n"))
            })
            .collect::<Result<_, _>>()?;
        check(!bodies[0].trim().is_empty(), || format!("`snrw {}` printed no report body", args.join(" ")))?;
        check(bodies[0] == bodies[1], || format!("`snrw {}` differs between runs", args.join(" ")))?;
    }
    Ok(format!("{} subcommands reproduce byte-identical bodies", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("bushy lemma exhaustion", bushy_lemmas),
        ("bigness oracle equivalence", bigness_oracle),
        ("machine-core laws", machine_laws),
        ("avoid_multiple", avoidance),
        ("DNR_g to SNPR_h reduction", theorem_two),
        ("DNR to SNR_h reduction", theorem_one),
        ("infinitely-often matching construction", kms),
        ("forcing simulation", forcing),
        ("immunity and pandemic constructions", immunity_and_pandemic),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
