//! Finite-horizon checks of diagonal non-recursiveness and of eventual
//! difference from a list of partial functions. A clean report is necessary,
//! never sufficient, for the infinitary property.

use serde::Serialize;

use crate::machine::{eval, ProgramIndex};
use crate::oracle::FunctionOracle;
use crate::{nat, Nat};

#[derive(Debug, Clone)]
pub enum DiagKind {
    /// `f(n) != phi_n(n)` wherever the latter halts.
    Dnr,
    /// `f(n) != phi_g(n)` for every listed `g` wherever the latter halts.
    Snpr(Vec<ProgramIndex>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(with = "crate::natser")]
    pub index: Nat,
    pub n: u64,
    #[serde(with = "crate::natser")]
    pub value: Nat,
}

pub fn diag_checks(f: &FunctionOracle, kind: &DiagKind, horizon: u64, budget: u64) -> Vec<Violation> {
    let mut out = Vec::new();
    for n in 0..=horizon {
        let x = nat(n);
        let indices: Vec<ProgramIndex> = match kind {
            DiagKind::Dnr => vec![ProgramIndex(x.clone())],
            DiagKind::Snpr(list) => list.clone(),
        };
        for g in indices {
            if let Some(v) = eval(&g, std::slice::from_ref(&x), budget).value() {
                if *v == f.query(&x) {
                    out.push(Violation {
                        index: g.0.clone(),
                        n,
                        value: v.clone(),
                    });
                }
            }
        }
    }
    out
}
