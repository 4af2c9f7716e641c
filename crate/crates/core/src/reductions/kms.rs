//! Building an infinitely-often-equal function from a partial one and a
//! function escaping its matching stages.
//!
//! `psi(x)[s]` converges when `x < s` and `psi` halts on `x` within `s`
//! steps, so only finitely many points converge at each stage.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::machine::{asm, eval, Instruction, Program, ProgramIndex};
use crate::oracle::FunctionOracle;
use crate::{nat, Error, Nat, Result};

/// `x -> values[x]` on the table, divergent beyond it. Lookup time grows
/// with `x`, which spreads the convergence stages.
pub fn table_program(values: &[Nat]) -> Program {
    let mut p = asm();
    let end = p.end();
    let hits: Vec<_> = values.iter().map(|_| p.label()).collect();
    for (i, l) in hits.iter().enumerate() {
        p.emit(Instruction::constant(2, i as u64)).jump_eq(1, 2, *l);
    }
    p.hang();
    for (l, v) in hits.into_iter().zip(values) {
        p.bind(l);
        p.emit(Instruction::Const(nat(0), v.clone())).goto(end);
    }
    p.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoStage {
    pub n: u64,
    #[serde(with = "crate::natser")]
    pub h_esc: Nat,
    /// Least stage at which `n + 1` table points have matched.
    pub g: Option<u64>,
    /// `h_esc(n) >= g(n)`.
    pub premise: bool,
    /// Points added from convergent `psi`, as `(x, value)`.
    #[serde(serialize_with = "ser_pairs")]
    pub added: Vec<(u64, Nat)>,
    /// The `(y, 0)` point.
    pub padding: u64,
    pub domain_size: usize,
    /// Table points where `j_{n+1}` agrees with `f`.
    pub agreements: usize,
}

fn ser_pairs<S: serde::Serializer>(v: &[(u64, Nat)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (x, y) in v {
        seq.serialize_element(&(x, y.to_str_radix(10)))?;
    }
    seq.end()
}

impl IoStage {
    /// Where the premise holds, `j_{n+1}` agrees with `f` at `n + 1` points.
    pub fn property_holds(&self) -> Option<bool> {
        self.premise.then_some(self.agreements as u64 > self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoMatchTrace {
    pub max_stage: u64,
    pub stages: Vec<IoStage>,
    /// `j_N` as `x -> value`.
    #[serde(skip)]
    pub j: BTreeMap<u64, Nat>,
}

impl IoMatchTrace {
    pub fn domain_strictly_grows(&self) -> bool {
        self.stages.windows(2).all(|w| w[0].domain_size < w[1].domain_size)
            && self.stages.first().is_none_or(|s| s.domain_size > 0)
    }
}

/// Runs `stages` steps of the construction. Stage values are capped at
/// `max_stage`; matching stages above the cap count as undefined.
pub fn io_match_construct(
    f: &[Nat],
    psi: &ProgramIndex,
    h_esc: &FunctionOracle,
    stages: u64,
    max_stage: u64,
) -> Result<IoMatchTrace> {
    if max_stage == 0 {
        return Err(Error::invalid("max_stage must be positive"));
    }
    // steps to convergence for x < max_stage, within the cap
    let runs: Vec<Option<(u64, Nat)>> = (0..max_stage)
        .map(|x| {
            let out = eval(psi, &[nat(x)], max_stage);
            out.value().map(|v| (out.steps_used, v.clone()))
        })
        .collect();
    let converges_by = |x: u64, s: u64| -> Option<&Nat> {
        if x >= s || x >= max_stage {
            return None;
        }
        runs[x as usize].as_ref().filter(|(steps, _)| *steps <= s).map(|(_, v)| v)
    };
    let mut match_stages: Vec<u64> = (0..f.len() as u64)
        .filter_map(|x| {
            let (steps, v) = runs.get(x as usize)?.as_ref()?;
            (*v == f[x as usize]).then_some((*steps).max(x + 1))
        })
        .collect();
    match_stages.sort_unstable();

    let mut j: BTreeMap<u64, Nat> = BTreeMap::new();
    let mut out = Vec::new();
    for n in 0..stages {
        let g = match_stages.get(n as usize).copied();
        let raw = h_esc.query_u64(n);
        let t = raw.to_u64().map_or(max_stage, |t| t.min(max_stage));
        let added: Vec<(u64, Nat)> = (0..t)
            .filter(|x| !j.contains_key(x))
            .filter_map(|x| converges_by(x, t).map(|v| (x, v.clone())))
            .collect();
        for (x, v) in &added {
            j.insert(*x, v.clone());
        }
        let padding = (0..).find(|y| !j.contains_key(y)).expect("finite domain");
        j.insert(padding, Nat::zero());
        let agreements = j
            .iter()
            .filter(|(x, v)| f.get(**x as usize) == Some(*v))
            .count();
        out.push(IoStage {
            n,
            premise: g.is_some_and(|g| raw >= nat(g)),
            h_esc: raw,
            g,
            added,
            padding,
            domain_size: j.len(),
            agreements,
        });
    }
    Ok(IoMatchTrace {
        max_stage,
        stages: out,
        j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{encode_program, programs};

    fn table(v: &[u64]) -> Vec<Nat> {
        v.iter().map(|&x| nat(x)).collect()
    }

    #[test]
    fn table_program_reads_back() {
        let f = table(&[3, 1, 4, 1, 5]);
        let e = encode_program(&table_program(&f));
        for (x, v) in f.iter().enumerate() {
            assert_eq!(eval(&e, &[nat(x as u64)], 1000).value(), Some(v));
        }
        assert!(!eval(&e, &[nat(5)], 1000).halted());
    }

    #[test]
    fn divergent_psi_only_pads() {
        let psi = encode_program(&programs::diverge());
        let esc = FunctionOracle::from_fn("big", |_| nat(50));
        let t = io_match_construct(&table(&[1, 2, 3]), &psi, &esc, 5, 100).unwrap();
        assert!(t.stages.iter().all(|s| s.g.is_none() && s.added.is_empty()));
        let pads: Vec<u64> = t.stages.iter().map(|s| s.padding).collect();
        assert_eq!(pads, vec![0, 1, 2, 3, 4]);
        assert!(t.domain_strictly_grows());
    }

    #[test]
    fn exact_psi_matches_everywhere_eventually() {
        let f = table(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let psi = encode_program(&table_program(&f));
        let esc = FunctionOracle::from_fn("fast", |n| n * 10u32 + 40u32);
        let t = io_match_construct(&f, &psi, &esc, 6, 1000).unwrap();
        assert!(t.domain_strictly_grows());
        for x in 0..f.len() as u64 {
            assert_eq!(t.j.get(&x), Some(&f[x as usize]));
        }
        // g(n) is the (n+1)-th smallest matching stage
        let gs: Vec<Option<u64>> = t.stages.iter().map(|s| s.g).collect();
        assert!(gs.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.stages.iter().all(|s| s.property_holds() != Some(false)));
    }
}
