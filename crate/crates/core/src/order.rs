//! Order functions: recursive, nondecreasing, unbounded, at least 2 at 0.
//! Only the first two properties are checkable, and only on a horizon.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::machine::{eval, ProgramIndex};
use crate::{nat, Error, Nat, Result};

#[derive(Clone)]
pub enum OrderFunction {
    /// `n -> k`
    Const(Nat),
    /// `n -> slope * n + offset`
    Linear { slope: Nat, offset: Nat },
    /// `n -> floor(sqrt(n)) + offset`
    Sqrt { offset: Nat },
    /// `n -> bitlength(n) + offset`
    Log { offset: Nat },
    /// Explicit values on `0..len`, continued by `+1` per step.
    Table(Arc<Vec<Nat>>),
    /// `n -> v` for the first cut `(m, v)` with `n <= m`, else
    /// `beyond`. Cuts must be listed with increasing thresholds.
    Steps {
        cuts: Arc<Vec<(Nat, Nat)>>,
        beyond: Nat,
    },
    /// A program asserted total; values are memoized.
    Program {
        index: ProgramIndex,
        budget: u64,
        memo: Arc<Mutex<HashMap<Nat, Nat>>>,
    },
}

impl OrderFunction {
    pub fn constant(k: u64) -> Self {
        OrderFunction::Const(nat(k))
    }

    pub fn linear(slope: u64, offset: u64) -> Self {
        OrderFunction::Linear {
            slope: nat(slope),
            offset: nat(offset),
        }
    }

    pub fn table(values: Vec<Nat>) -> Self {
        OrderFunction::Table(Arc::new(values))
    }

    pub fn program(index: ProgramIndex, budget: u64) -> Self {
        OrderFunction::Program {
            index,
            budget,
            memo: Arc::default(),
        }
    }

    pub fn value(&self, n: &Nat) -> Result<Nat> {
        Ok(match self {
            OrderFunction::Const(k) => k.clone(),
            OrderFunction::Linear { slope, offset } => slope * n + offset,
            OrderFunction::Sqrt { offset } => n.sqrt() + offset,
            OrderFunction::Log { offset } => Nat::from(n.bits()) + offset,
            OrderFunction::Table(values) => match n.to_usize().filter(|&i| i < values.len()) {
                Some(i) => values[i].clone(),
                None => match values.last() {
                    Some(last) => last + n + 1u32 - values.len(),
                    None => n.clone(),
                },
            },
            OrderFunction::Steps { cuts, beyond } => cuts
                .iter()
                .find(|(m, _)| n <= m)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| beyond.clone()),
            OrderFunction::Program {
                index,
                budget,
                memo,
            } => {
                if let Some(v) = memo.lock().expect("memo poisoned").get(n) {
                    return Ok(v.clone());
                }
                let out = eval(index, std::slice::from_ref(n), *budget);
                let v = out.value().cloned().ok_or_else(|| Error::Undetermined {
                    what: format!("order function program {index} at {n}"),
                    budget: *budget,
                })?;
                memo.lock()
                    .expect("memo poisoned")
                    .insert(n.clone(), v.clone());
                v
            }
        })
    }

    pub fn at(&self, n: u64) -> Result<Nat> {
        self.value(&nat(n))
    }

    /// `at(n)` for values that must fit a machine word (alphabet sizes,
    /// cardinalities).
    pub fn small(&self, n: u64) -> Result<u64> {
        let v = self.at(n)?;
        v.to_u64()
            .ok_or_else(|| Error::invalid(format!("order value {v} at {n} does not fit u64")))
    }
}

impl fmt::Display for OrderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderFunction::Const(k) => write!(f, "const:{k}"),
            OrderFunction::Linear { slope, offset } => write!(f, "linear:{slope},{offset}"),
            OrderFunction::Sqrt { offset } => write!(f, "sqrt:{offset}"),
            OrderFunction::Log { offset } => write!(f, "log:{offset}"),
            OrderFunction::Table(v) => {
                let items: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "table:{}", items.join(","))
            }
            OrderFunction::Steps { cuts, beyond } => {
                write!(f, "steps:{} cuts, beyond {beyond}", cuts.len())
            }
            OrderFunction::Program { index, budget, .. } => write!(f, "program:{index},{budget}"),
        }
    }
}

impl fmt::Debug for OrderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrderFunction({self})")
    }
}

impl FromStr for OrderFunction {
    type Err = Error;

    /// `const:k`, `linear:a,b`, `sqrt:c`, `log:c`, `table:v0,v1,...`,
    /// `program:index,budget`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unrecognized order function `{s}`"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<Nat> = rest
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| Nat::from_str(t.trim()).map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let one = |nums: &[Nat]| -> Result<Nat> {
            match nums {
                [a] => Ok(a.clone()),
                _ => Err(bad()),
            }
        };
        match kind.trim() {
            "const" => Ok(OrderFunction::Const(one(&nums)?)),
            "sqrt" => Ok(OrderFunction::Sqrt { offset: one(&nums)? }),
            "log" => Ok(OrderFunction::Log { offset: one(&nums)? }),
            "linear" => match nums.as_slice() {
                [a, b] => Ok(OrderFunction::Linear {
                    slope: a.clone(),
                    offset: b.clone(),
                }),
                _ => Err(bad()),
            },
            "table" if !nums.is_empty() => Ok(OrderFunction::table(nums)),
            "program" => match nums.as_slice() {
                [e, b] => Ok(OrderFunction::program(
                    ProgramIndex(e.clone()),
                    b.to_u64().ok_or_else(bad)?,
                )),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub horizon: u64,
    #[serde(with = "crate::natser")]
    pub max_value: Nat,
    /// False when `h` never increases on the horizon; unboundedness itself
    /// cannot be observed.
    pub grew: bool,
}

/// Checks `h(0) >= 2` and `h(n) <= h(n + 1)` for `n < horizon`.
pub fn order_validate(h: &OrderFunction, horizon: u64) -> Result<OrderReport> {
    let first = h.at(0)?;
    if first < nat(2) {
        return Err(Error::OrderViolation {
            n: 0,
            reason: format!("h(0) = {first} is below 2"),
        });
    }
    let mut prev = first.clone();
    for n in 0..horizon {
        let next = h.at(n + 1)?;
        if next < prev {
            return Err(Error::OrderViolation {
                n,
                reason: format!("h({n}) = {prev} > h({}) = {next}", n + 1),
            });
        }
        prev = next;
    }
    Ok(OrderReport {
        horizon,
        grew: prev > first,
        max_value: prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_passes_with_max() {
        let h = OrderFunction::linear(1, 2);
        let r = order_validate(&h, 100).unwrap();
        assert_eq!(r.max_value, nat(102));
        assert!(r.grew);
    }

    #[test]
    fn constant_passes_without_growth() {
        let r = order_validate(&OrderFunction::constant(2), 50).unwrap();
        assert!(!r.grew);
        assert_eq!(r.max_value, nat(2));
    }

    #[test]
    fn base_below_two_fails_at_zero() {
        let h = OrderFunction::table(vec![nat(1), nat(3)]);
        assert!(matches!(
            order_validate(&h, 10),
            Err(Error::OrderViolation { n: 0, .. })
        ));
    }

    #[test]
    fn decrease_reports_least_n() {
        let h = OrderFunction::table(vec![nat(2), nat(4), nat(3), nat(1)]);
        assert!(matches!(
            order_validate(&h, 10),
            Err(Error::OrderViolation { n: 1, .. })
        ));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["const:3", "linear:2,2", "sqrt:2", "log:2", "table:2,3,5"] {
            let h: OrderFunction = s.parse().unwrap();
            assert_eq!(h.to_string(), s);
        }
        assert!("bogus".parse::<OrderFunction>().is_err());
        assert!("linear:1".parse::<OrderFunction>().is_err());
    }

    #[test]
    fn table_continues_upward() {
        let h = OrderFunction::table(vec![nat(2), nat(5)]);
        assert_eq!(h.at(1).unwrap(), nat(5));
        assert_eq!(h.at(2).unwrap(), nat(6));
        assert_eq!(h.at(4).unwrap(), nat(8));
    }

    #[test]
    fn program_order_function_memoizes() {
        let succ = crate::encode_program(&crate::machine::programs::successor());
        let h = OrderFunction::program(succ, 100);
        assert_eq!(h.at(4).unwrap(), nat(5));
        assert_eq!(h.at(4).unwrap(), nat(5));
        let r = order_validate(&OrderFunction::program(ProgramIndex::from(0), 10), 3);
        assert!(r.is_err(), "constant 0 violates h(0) >= 2");
    }
}
