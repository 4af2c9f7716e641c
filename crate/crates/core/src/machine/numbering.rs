//! The program numbering: a bijection between naturals and programs.
//!
//! Sequences are built with a self-delimiting split `z <-> (a, b)`: writing
//! `w = z + 1` in binary, the number of trailing zeros `k` announces a k-bit
//! payload for `a + 1`, and the bits above it are `b`. Index length is
//! therefore additive in the parts, which keeps programs that carry other
//! programs' indices as constants (specializations, fixed points) at a
//! manageable size.

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::program::{Instruction, Program};
use crate::Nat;

/// A program's number. Every natural is one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ProgramIndex(#[serde(with = "crate::natser")] pub Nat);

impl ProgramIndex {
    pub fn new(n: impl Into<Nat>) -> Self {
        ProgramIndex(n.into())
    }

    pub fn value(&self) -> &Nat {
        &self.0
    }

    pub fn program(&self) -> Program {
        decode_program(self)
    }
}

impl From<u64> for ProgramIndex {
    fn from(n: u64) -> Self {
        ProgramIndex(Nat::from(n))
    }
}

impl From<Nat> for ProgramIndex {
    fn from(n: Nat) -> Self {
        ProgramIndex(n)
    }
}

impl std::fmt::Display for ProgramIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn join(a: &Nat, b: &Nat) -> Nat {
    let m = a + 1u32;
    let k = m.bits() - 1;
    let low = &m - (Nat::one() << k);
    let w = (Nat::one() << k) | (low << (k + 1)) | (b << (2 * k + 1));
    w - 1u32
}

pub(crate) fn split(z: &Nat) -> (Nat, Nat) {
    let w = z + 1u32;
    let k = w.trailing_zeros().expect("w >= 1 has a set bit");
    let mask = (Nat::one() << k) - 1u32;
    let m = (Nat::one() << k) | ((&w >> (k + 1)) & mask);
    (m - 1u32, w >> (2 * k + 1))
}

fn encode_instruction(ins: &Instruction) -> Nat {
    let ops = ins.operands();
    let mut iter = ops.iter().rev();
    let mut rest = (*iter.next().expect("every opcode has an operand")).clone();
    for op in iter {
        rest = join(op, &rest);
    }
    rest * Instruction::OPCODES as u32 + ins.tag() as u32
}

fn decode_instruction(m: &Nat) -> Instruction {
    let opcodes = Nat::from(Instruction::OPCODES);
    let tag = (m % &opcodes).to_usize().expect("tag below 10");
    let mut rest = m / &opcodes;
    let arity = Instruction::arity(tag);
    let mut ops = Vec::with_capacity(arity);
    for _ in 1..arity {
        let (a, b) = split(&rest);
        ops.push(a);
        rest = b;
    }
    ops.push(rest);
    Instruction::from_parts(tag, ops)
}

pub fn encode_program(p: &Program) -> ProgramIndex {
    let mut acc = Nat::zero();
    for ins in p.instructions.iter().rev() {
        acc = join(&encode_instruction(ins), &acc) + 1u32;
    }
    ProgramIndex(acc)
}

pub fn decode_program(e: &ProgramIndex) -> Program {
    let mut instructions = Vec::new();
    let mut rest = e.0.clone();
    while !rest.is_zero() {
        let (head, tail) = split(&(rest - 1u32));
        instructions.push(decode_instruction(&head));
        rest = tail;
    }
    Program::new(instructions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat;

    #[test]
    fn split_join_small_values() {
        for z in 0..2000u64 {
            let (a, b) = split(&nat(z));
            assert_eq!(join(&a, &b), nat(z));
        }
        assert_eq!(split(&nat(0)), (nat(0), nat(0)));
    }

    #[test]
    fn successor_program_round_trip() {
        let p = Program::new(vec![Instruction::succ(0)]);
        let e = encode_program(&p);
        assert_eq!(e, ProgramIndex::from(2));
        assert_eq!(decode_program(&e), p);
    }

    #[test]
    fn zero_is_the_empty_program() {
        assert!(decode_program(&ProgramIndex::from(0)).is_empty());
        assert_eq!(encode_program(&decode_program(&ProgramIndex::from(0))), ProgramIndex::from(0));
    }

    #[test]
    fn golden_decode_12345() {
        let p = decode_program(&ProgramIndex::from(12345));
        assert_eq!(p.to_string(), GOLDEN_12345);
        assert_eq!(encode_program(&p), ProgramIndex::from(12345));
    }

    // recorded from the decoder; repo-relative
    const GOLDEN_12345: &str = "Z 0\nP 0 0 0\nO 0 3\n";

    #[test]
    fn index_length_is_additive() {
        let big = Nat::one() << 4000u32;
        let p = Program::new(vec![
            Instruction::constant(1, big.clone()),
            Instruction::constant(2, big),
            Instruction::succ(0),
        ]);
        let e = encode_program(&p);
        assert!(e.0.bits() < 3 * 8100, "{} bits", e.0.bits());
        assert_eq!(decode_program(&e), p);
    }
}
