use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::{nat, Error, Nat};

/// One register-machine instruction. Registers and jump targets are naturals;
/// jump targets are 0-based positions and any target past the end halts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    /// `Z n`: zero register n.
    Zero(Nat),
    /// `S n`: increment register n.
    Succ(Nat),
    /// `T m n`: copy register m into register n.
    Copy(Nat, Nat),
    /// `J m n q`: jump to q when registers m and n agree.
    Jump(Nat, Nat, Nat),
    /// `O m n`: register n gets the oracle value at register m; blocks when
    /// the query falls outside the oracle string.
    Query(Nat, Nat),
    /// `C n k`: load the constant k into register n.
    Const(Nat, Nat),
    /// `P m n p`: register p gets `pair(Rm, Rn)`.
    Pair(Nat, Nat, Nat),
    /// `U m n p`: `(Rn, Rp) = unpair(Rm)`.
    Unpair(Nat, Nat, Nat),
    /// `E m n p`: register p gets the value of program Rm on input Rn.
    Call(Nat, Nat, Nat),
    /// `K m n p`: register p gets `smn(Rm, (Rn,))`.
    Specialize(Nat, Nat, Nat),
}

impl Instruction {
    pub const OPCODES: usize = 10;

    pub fn zero(r: u64) -> Self {
        Instruction::Zero(nat(r))
    }
    pub fn succ(r: u64) -> Self {
        Instruction::Succ(nat(r))
    }
    pub fn copy(from: u64, to: u64) -> Self {
        Instruction::Copy(nat(from), nat(to))
    }
    pub fn jump(m: u64, n: u64, target: u64) -> Self {
        Instruction::Jump(nat(m), nat(n), nat(target))
    }
    pub fn query(m: u64, n: u64) -> Self {
        Instruction::Query(nat(m), nat(n))
    }
    pub fn constant(r: u64, k: impl Into<Nat>) -> Self {
        Instruction::Const(nat(r), k.into())
    }
    pub fn pair(m: u64, n: u64, p: u64) -> Self {
        Instruction::Pair(nat(m), nat(n), nat(p))
    }
    pub fn unpair(m: u64, n: u64, p: u64) -> Self {
        Instruction::Unpair(nat(m), nat(n), nat(p))
    }
    pub fn call(m: u64, n: u64, p: u64) -> Self {
        Instruction::Call(nat(m), nat(n), nat(p))
    }
    pub fn specialize(m: u64, n: u64, p: u64) -> Self {
        Instruction::Specialize(nat(m), nat(n), nat(p))
    }

    pub fn tag(&self) -> usize {
        match self {
            Instruction::Zero(_) => 0,
            Instruction::Succ(_) => 1,
            Instruction::Copy(..) => 2,
            Instruction::Jump(..) => 3,
            Instruction::Query(..) => 4,
            Instruction::Const(..) => 5,
            Instruction::Pair(..) => 6,
            Instruction::Unpair(..) => 7,
            Instruction::Call(..) => 8,
            Instruction::Specialize(..) => 9,
        }
    }

    pub fn mnemonic(&self) -> char {
        b"ZSTJOCPUEK"[self.tag()] as char
    }

    pub(crate) fn arity(tag: usize) -> usize {
        [1, 1, 2, 3, 2, 2, 3, 3, 3, 3][tag]
    }

    pub fn operands(&self) -> Vec<&Nat> {
        match self {
            Instruction::Zero(a) | Instruction::Succ(a) => vec![a],
            Instruction::Copy(a, b) | Instruction::Query(a, b) | Instruction::Const(a, b) => {
                vec![a, b]
            }
            Instruction::Jump(a, b, c)
            | Instruction::Pair(a, b, c)
            | Instruction::Unpair(a, b, c)
            | Instruction::Call(a, b, c)
            | Instruction::Specialize(a, b, c) => vec![a, b, c],
        }
    }

    pub(crate) fn from_parts(tag: usize, mut ops: Vec<Nat>) -> Self {
        debug_assert_eq!(ops.len(), Self::arity(tag));
        let mut next = || ops.remove(0);
        match tag {
            0 => Instruction::Zero(next()),
            1 => Instruction::Succ(next()),
            2 => Instruction::Copy(next(), next()),
            3 => Instruction::Jump(next(), next(), next()),
            4 => Instruction::Query(next(), next()),
            5 => Instruction::Const(next(), next()),
            6 => Instruction::Pair(next(), next(), next()),
            7 => Instruction::Unpair(next(), next(), next()),
            8 => Instruction::Call(next(), next(), next()),
            9 => Instruction::Specialize(next(), next(), next()),
            _ => unreachable!("opcode tag out of range"),
        }
    }

    /// Registers read or written, in operand order (jump targets and
    /// constants excluded).
    pub fn registers(&self) -> Vec<&Nat> {
        match self {
            Instruction::Jump(a, b, _) => vec![a, b],
            Instruction::Const(a, _) => vec![a],
            _ => self.operands(),
        }
    }

    /// Rewrites every register operand through `reg` and every jump target
    /// through `target`.
    pub(crate) fn relocate(
        &self,
        reg: impl Fn(&Nat) -> Nat,
        target: impl Fn(&Nat) -> Nat,
    ) -> Self {
        match self {
            Instruction::Zero(a) => Instruction::Zero(reg(a)),
            Instruction::Succ(a) => Instruction::Succ(reg(a)),
            Instruction::Copy(a, b) => Instruction::Copy(reg(a), reg(b)),
            Instruction::Jump(a, b, q) => Instruction::Jump(reg(a), reg(b), target(q)),
            Instruction::Query(a, b) => Instruction::Query(reg(a), reg(b)),
            Instruction::Const(a, k) => Instruction::Const(reg(a), k.clone()),
            Instruction::Pair(a, b, c) => Instruction::Pair(reg(a), reg(b), reg(c)),
            Instruction::Unpair(a, b, c) => Instruction::Unpair(reg(a), reg(b), reg(c)),
            Instruction::Call(a, b, c) => Instruction::Call(reg(a), reg(b), reg(c)),
            Instruction::Specialize(a, b, c) => Instruction::Specialize(reg(a), reg(b), reg(c)),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mnemonic())?;
        for op in self.operands() {
            write!(f, " {op}")?;
        }
        Ok(())
    }
}

/// A register-machine program. Inputs load into R1..Rk, every other register
/// starts at 0, the output is read from R0 once the counter leaves the code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Program { instructions }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// One past the highest register mentioned anywhere (at least 1).
    pub fn register_span(&self) -> Nat {
        self.instructions
            .iter()
            .flat_map(|i| i.registers().into_iter().cloned())
            .max()
            .map(|m| m + 1u32)
            .unwrap_or_else(|| nat(1))
    }

    pub fn uses_oracle(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::Query(..)))
    }

    /// Parses the `.urm` text format: one instruction per line, `#` starts a
    /// comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut instructions = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let mut tokens = line.split_whitespace();
            let op = tokens.next().expect("non-empty line has a token");
            let tag = match op {
                "Z" => 0,
                "S" => 1,
                "T" => 2,
                "J" => 3,
                "O" => 4,
                "C" => 5,
                "P" => 6,
                "U" => 7,
                "E" => 8,
                "K" => 9,
                other => return Err(perr(format!("unknown instruction `{other}`"))),
            };
            let ops = tokens
                .map(|t| {
                    BigUint::from_str(t).map_err(|_| perr(format!("`{t}` is not a natural number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let want = Instruction::arity(tag);
            if ops.len() != want {
                return Err(perr(format!(
                    "`{op}` takes {want} operand(s), found {}",
                    ops.len()
                )));
            }
            instructions.push(Instruction::from_parts(tag, ops));
        }
        Ok(Program { instructions })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Program::parse(s)
    }
}

impl From<Vec<Instruction>> for Program {
    fn from(v: Vec<Instruction>) -> Self {
        Program::new(v)
    }
}
