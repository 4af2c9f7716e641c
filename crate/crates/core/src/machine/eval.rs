//! Step-bounded, optionally oracle-relative evaluation.
//!
//! Every executed instruction costs one step; a call `E` additionally charges
//! the callee's steps to the same budget. An oracle query outside the oracle
//! string blocks, which consumes the rest of the budget.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::numbering::{decode_program, ProgramIndex};
use super::program::{Instruction, Program};
use super::smn::smn;
use crate::pairing::{pair, unpair};
use crate::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EvalStatus {
    Halted(#[serde(with = "crate::natser")] Nat),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalOutcome {
    pub status: EvalStatus,
    pub steps_used: u64,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Nat> {
        match &self.status {
            EvalStatus::Halted(v) => Some(v),
            EvalStatus::Exhausted => None,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self.status, EvalStatus::Halted(_))
    }
}

#[derive(Debug, Clone)]
enum Op {
    Zero(usize),
    Succ(usize),
    Copy(usize, usize),
    Jump(usize, usize, usize),
    Query(usize, usize),
    Const(usize, Nat),
    Pair(usize, usize, usize),
    Unpair(usize, usize, usize),
    Call(usize, usize, usize),
    Specialize(usize, usize, usize),
}

/// A program with registers renumbered densely; slot 0 is R0.
#[derive(Debug)]
struct Compiled {
    ops: Vec<Op>,
    slots: usize,
    /// slot of input register R(i+1), when the program mentions it
    inputs: Vec<Option<usize>>,
}

impl Compiled {
    fn new(p: &Program) -> Self {
        let mut map: HashMap<Nat, usize> = HashMap::new();
        map.insert(Nat::zero(), 0);
        let mut slot = |r: &Nat| -> usize {
            let next = map.len();
            *map.entry(r.clone()).or_insert(next)
        };
        let len = p.len();
        let target = |q: &Nat| q.to_usize().map_or(len, |q| q.min(len));
        let ops = p
            .instructions
            .iter()
            .map(|ins| match ins {
                Instruction::Zero(a) => Op::Zero(slot(a)),
                Instruction::Succ(a) => Op::Succ(slot(a)),
                Instruction::Copy(a, b) => Op::Copy(slot(a), slot(b)),
                Instruction::Jump(a, b, q) => Op::Jump(slot(a), slot(b), target(q)),
                Instruction::Query(a, b) => Op::Query(slot(a), slot(b)),
                Instruction::Const(a, k) => Op::Const(slot(a), k.clone()),
                Instruction::Pair(a, b, c) => Op::Pair(slot(a), slot(b), slot(c)),
                Instruction::Unpair(a, b, c) => Op::Unpair(slot(a), slot(b), slot(c)),
                Instruction::Call(a, b, c) => Op::Call(slot(a), slot(b), slot(c)),
                Instruction::Specialize(a, b, c) => Op::Specialize(slot(a), slot(b), slot(c)),
            })
            .collect();
        let max_input = map
            .keys()
            .filter_map(|r| r.to_usize())
            .max()
            .unwrap_or(0);
        let inputs = (1..=max_input)
            .map(|i| map.get(&Nat::from(i)).copied())
            .collect();
        Compiled {
            ops,
            slots: map.len(),
            inputs,
        }
    }

    fn frame(self: &Arc<Self>, args: &[Nat], ret: usize) -> Frame {
        let mut regs = vec![Nat::zero(); self.slots];
        for (slot, arg) in self.inputs.iter().zip(args) {
            if let Some(s) = slot {
                regs[*s] = arg.clone();
            }
        }
        Frame {
            code: Arc::clone(self),
            regs,
            pc: 0,
            ret,
        }
    }
}

struct Frame {
    code: Arc<Compiled>,
    regs: Vec<Nat>,
    pc: usize,
    ret: usize,
}

const CACHE_CAP: usize = 4096;

fn compiled(e: &Nat) -> Arc<Compiled> {
    static CACHE: OnceLock<Mutex<HashMap<Nat, Arc<Compiled>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("cache poisoned").get(e) {
        return Arc::clone(c);
    }
    let c = Arc::new(Compiled::new(&decode_program(&ProgramIndex(e.clone()))));
    let mut guard = cache.lock().expect("cache poisoned");
    if guard.len() >= CACHE_CAP {
        guard.clear();
    }
    guard.insert(e.clone(), Arc::clone(&c));
    c
}

/// Runs program `e` on `args` for at most `budget` steps without an oracle.
pub fn eval(e: &ProgramIndex, args: &[Nat], budget: u64) -> EvalOutcome {
    run(compiled(e.value()), args, budget, None)
}

/// Runs program `e` relative to the finite oracle string `oracle`.
pub fn eval_with(
    e: &ProgramIndex,
    args: &[Nat],
    budget: u64,
    oracle: Option<&[Nat]>,
) -> EvalOutcome {
    run(compiled(e.value()), args, budget, oracle)
}

type DiagonalMemo = Mutex<HashMap<(Nat, u64), Option<Nat>>>;

/// `phi_x(x)` within `budget` steps, memoized across callers. Oracles and
/// checkers ask the diagonal question far more often than anything else.
pub fn diagonal(x: &Nat, budget: u64) -> Option<Nat> {
    static DIAG: OnceLock<DiagonalMemo> = OnceLock::new();
    let memo = DIAG.get_or_init(Default::default);
    let key = (x.clone(), budget);
    if let Some(v) = memo.lock().expect("diagonal memo poisoned").get(&key) {
        return v.clone();
    }
    let v = eval(&ProgramIndex(x.clone()), std::slice::from_ref(x), budget)
        .value()
        .cloned();
    let mut guard = memo.lock().expect("diagonal memo poisoned");
    if guard.len() >= 1 << 16 {
        guard.clear();
    }
    guard.insert(key, v.clone());
    v
}

/// Runs a program that has not been numbered.
pub fn eval_program(p: &Program, args: &[Nat], budget: u64, oracle: Option<&[Nat]>) -> EvalOutcome {
    run(Arc::new(Compiled::new(p)), args, budget, oracle)
}

fn run(code: Arc<Compiled>, args: &[Nat], budget: u64, oracle: Option<&[Nat]>) -> EvalOutcome {
    let oracle = oracle.unwrap_or(&[]);
    let exhausted = EvalOutcome {
        status: EvalStatus::Exhausted,
        steps_used: budget,
    };
    let mut stack = vec![code.frame(args, 0)];
    let mut steps = 0u64;
    loop {
        let frame = stack.last_mut().expect("stack is never empty here");
        if frame.pc >= frame.code.ops.len() {
            let done = stack.pop().expect("frame present");
            let value = done.regs.into_iter().next().unwrap_or_default();
            match stack.last_mut() {
                None => {
                    return EvalOutcome {
                        status: EvalStatus::Halted(value),
                        steps_used: steps,
                    }
                }
                Some(parent) => {
                    parent.regs[done.ret] = value;
                    parent.pc += 1;
                }
            }
            continue;
        }
        if steps == budget {
            return exhausted;
        }
        steps += 1;
        let regs = &mut frame.regs;
        let mut next = frame.pc + 1;
        match &frame.code.ops[frame.pc] {
            Op::Zero(a) => regs[*a] = Nat::zero(),
            Op::Succ(a) => regs[*a] += 1u32,
            Op::Copy(a, b) => regs[*b] = regs[*a].clone(),
            Op::Jump(a, b, q) => {
                if regs[*a] == regs[*b] {
                    next = *q;
                }
            }
            Op::Query(a, b) => match regs[*a].to_usize().and_then(|i| oracle.get(i)) {
                Some(v) => regs[*b] = v.clone(),
                None => return exhausted,
            },
            Op::Const(a, k) => regs[*a] = k.clone(),
            Op::Pair(a, b, c) => regs[*c] = pair(&regs[*a], &regs[*b]),
            Op::Unpair(a, b, c) => {
                let (x, y) = unpair(&regs[*a]);
                regs[*b] = x;
                regs[*c] = y;
            }
            Op::Specialize(a, b, c) => {
                let idx = smn(&ProgramIndex(regs[*a].clone()), &[regs[*b].clone()]);
                regs[*c] = idx.0;
            }
            Op::Call(a, b, c) => {
                let callee = compiled(&regs[*a]);
                let arg = regs[*b].clone();
                let ret = *c;
                stack.push(callee.frame(&[arg], ret));
                continue;
            }
        }
        frame.pc = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::encode_program;
    use crate::nat;

    fn idx(ins: Vec<Instruction>) -> ProgramIndex {
        encode_program(&Program::new(ins))
    }

    #[test]
    fn successor_halts_with_one() {
        let out = eval(&idx(vec![Instruction::succ(0)]), &[], 10);
        assert_eq!(out.status, EvalStatus::Halted(nat(1)));
        assert_eq!(out.steps_used, 1);
    }

    #[test]
    fn self_loop_exhausts() {
        let out = eval(&idx(vec![Instruction::jump(0, 0, 0)]), &[], 100);
        assert_eq!(out.status, EvalStatus::Exhausted);
        assert_eq!(out.steps_used, 100);
    }

    #[test]
    fn oracle_query_is_zero_based() {
        let e = idx(vec![Instruction::query(1, 0)]);
        let tau = [nat(5), nat(6), nat(7), nat(8)];
        let out = eval_with(&e, &[nat(3)], 10, Some(&tau));
        assert_eq!(out.status, EvalStatus::Halted(nat(8)));
        // out of range blocks
        let out = eval_with(&e, &[nat(4)], 10, Some(&tau));
        assert_eq!(out, EvalOutcome { status: EvalStatus::Exhausted, steps_used: 10 });
    }

    #[test]
    fn empty_program_halts_at_zero_budget() {
        let out = eval(&ProgramIndex::from(0), &[nat(9)], 0);
        assert_eq!(out.status, EvalStatus::Halted(nat(0)));
        assert_eq!(out.steps_used, 0);
    }

    #[test]
    fn call_charges_callee_steps() {
        // callee: S 0, S 0 -> 2 ; caller: C 1 <callee>, E 1 2 0
        let callee = idx(vec![Instruction::succ(0), Instruction::succ(0)]);
        let caller = idx(vec![
            Instruction::constant(1, callee.0.clone()),
            Instruction::call(1, 2, 0),
        ]);
        let out = eval(&caller, &[], 100);
        assert_eq!(out.status, EvalStatus::Halted(nat(2)));
        assert_eq!(out.steps_used, 4);
        assert!(!eval(&caller, &[], 3).halted());
    }

    #[test]
    fn pair_and_unpair_instructions() {
        let e = idx(vec![Instruction::pair(1, 2, 3), Instruction::unpair(3, 0, 4)]);
        let out = eval(&e, &[nat(7), nat(2)], 10);
        assert_eq!(out.value(), Some(&nat(7)));
    }
}
