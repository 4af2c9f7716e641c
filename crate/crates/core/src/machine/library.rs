//! A small assembler with labels and the standard programs built with it.

use super::program::{Instruction, Program};
use crate::nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label(usize);

enum Slot {
    Ready(Instruction),
    Jump(u64, u64, Label),
}

/// Straight-line code with forward and backward labels.
#[derive(Default)]
pub struct Asm {
    code: Vec<Slot>,
    labels: Vec<Option<usize>>,
    end: Option<Label>,
}

pub fn asm() -> Asm {
    Asm::new()
}

impl Asm {
    pub fn new() -> Self {
        Asm::default()
    }

    pub fn label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, l: Label) {
        assert!(self.labels[l.0].is_none(), "label bound twice");
        self.labels[l.0] = Some(self.code.len());
    }

    /// A label bound to the end of the program; jumping there halts.
    pub fn end(&mut self) -> Label {
        match self.end {
            Some(l) => l,
            None => {
                let l = self.label();
                self.end = Some(l);
                l
            }
        }
    }

    pub fn emit(&mut self, ins: Instruction) -> &mut Self {
        self.code.push(Slot::Ready(ins));
        self
    }

    pub fn jump_eq(&mut self, m: u64, n: u64, to: Label) -> &mut Self {
        self.code.push(Slot::Jump(m, n, to));
        self
    }

    /// Unconditional jump (R0 always equals itself).
    pub fn goto(&mut self, to: Label) -> &mut Self {
        self.jump_eq(0, 0, to)
    }

    /// Jumps to itself forever.
    pub fn hang(&mut self) -> &mut Self {
        let l = self.label();
        self.bind(l);
        self.goto(l)
    }

    pub fn finish(mut self) -> Program {
        if let Some(end) = self.end {
            self.labels[end.0] = Some(self.code.len());
        }
        let labels = self.labels;
        let code = self
            .code
            .into_iter()
            .map(|slot| match slot {
                Slot::Ready(ins) => ins,
                Slot::Jump(m, n, l) => {
                    let at = labels[l.0].expect("jump to an unbound label");
                    Instruction::jump(m, n, at as u64)
                }
            })
            .collect();
        Program::new(code)
    }

    /// `q := v div a`, `r := v mod a` with scratch register `i`; `a` must
    /// hold a value of at least 1.
    pub fn divmod(&mut self, v: u64, a: u64, q: u64, r: u64, i: u64) -> &mut Self {
        let top = self.label();
        let carry = self.label();
        let done = self.label();
        self.emit(Instruction::zero(q))
            .emit(Instruction::zero(r))
            .emit(Instruction::zero(i));
        self.bind(top);
        self.jump_eq(i, v, done)
            .emit(Instruction::succ(i))
            .emit(Instruction::succ(r))
            .jump_eq(r, a, carry)
            .goto(top);
        self.bind(carry);
        self.emit(Instruction::zero(r))
            .emit(Instruction::succ(q))
            .goto(top);
        self.bind(done);
        self
    }
}

/// `x -> x`
pub fn identity() -> Program {
    Program::new(vec![Instruction::copy(1, 0)])
}

/// `x -> x + 1`
pub fn successor() -> Program {
    Program::new(vec![Instruction::copy(1, 0), Instruction::succ(0)])
}

/// Diverges on every input.
pub fn diverge() -> Program {
    Program::new(vec![Instruction::jump(0, 0, 0)])
}

/// `(x, y) -> x + y`
pub fn add() -> Program {
    let mut a = asm();
    let top = a.label();
    let end = a.end();
    a.emit(Instruction::copy(1, 0)).emit(Instruction::zero(3));
    a.bind(top);
    a.jump_eq(3, 2, end)
        .emit(Instruction::succ(0))
        .emit(Instruction::succ(3))
        .goto(top);
    a.finish()
}

/// `(u, x) -> phi_{phi_u(u)}(x)`, the diagonal used by the recursion theorem.
pub fn self_apply() -> Program {
    Program::new(vec![Instruction::call(1, 1, 3), Instruction::call(3, 2, 0)])
}

/// `e -> smn(T 1 0, (e,))`: maps `e` to an index of the constant-`e`
/// function. Its fixed point outputs its own index.
pub fn constant_maker() -> Program {
    let first = super::numbering::encode_program(&identity());
    Program::new(vec![
        Instruction::constant(2, first.0),
        Instruction::specialize(2, 1, 0),
    ])
}

/// `(x, e) -> phi_e(x)`; `smn(transpose, (x,))` is an index `r(x)` with
/// `phi_{r(x)}(e) = phi_e(x)`.
pub fn transpose() -> Program {
    Program::new(vec![Instruction::call(2, 1, 0)])
}

/// `(e, x, a, _) -> ` the x-th base-a digit of `phi_e(x)`.
///
/// Specialized on `(e, x, a)` this is a constant function, the index
/// queried by the value-avoidance reduction.
pub fn base_digit() -> Program {
    let mut p = asm();
    let outer = p.label();
    let last = p.label();
    p.emit(Instruction::call(1, 2, 5)).emit(Instruction::zero(6));
    p.bind(outer);
    p.jump_eq(6, 2, last);
    p.divmod(5, 3, 7, 8, 9);
    p.emit(Instruction::copy(7, 5))
        .emit(Instruction::succ(6))
        .goto(outer);
    p.bind(last);
    p.divmod(5, 3, 7, 8, 9);
    p.emit(Instruction::copy(8, 0));
    p.finish()
}

/// `(e, n, _) -> project(n, e, phi_e(n))`. Specialized on `(e, n)` this is
/// the constant function used by the second DNR-to-SNPR reduction.
pub fn projector() -> Program {
    let mut p = asm();
    let top = p.label();
    let out_cur = p.label();
    let out_head = p.label();
    let end = p.end();
    p.emit(Instruction::call(1, 2, 4))
        .emit(Instruction::zero(5))
        .emit(Instruction::zero(6))
        .emit(Instruction::succ(6));
    p.bind(top);
    p.jump_eq(6, 2, out_cur)
        .emit(Instruction::unpair(4, 7, 8))
        .jump_eq(5, 1, out_head)
        .emit(Instruction::copy(8, 4))
        .emit(Instruction::succ(5))
        .emit(Instruction::succ(6))
        .goto(top);
    p.bind(out_cur);
    p.emit(Instruction::copy(4, 0)).goto(end);
    p.bind(out_head);
    p.emit(Instruction::copy(7, 0));
    p.finish()
}

/// Halts (with 0) exactly on even inputs.
pub fn halt_on_evens() -> Program {
    let mut p = asm();
    let top = p.label();
    let stuck = p.label();
    let end = p.end();
    p.bind(top);
    p.jump_eq(2, 1, end)
        .emit(Instruction::succ(2))
        .jump_eq(2, 1, stuck)
        .emit(Instruction::succ(2))
        .goto(top);
    p.bind(stuck);
    p.hang();
    p.finish()
}

/// Decides divisibility by `m` (1 when `m | x`, else 0), burning `delay`
/// extra loop iterations per unit of x.
pub fn divisibility_decider(m: u64, delay: u64) -> Program {
    let mut p = asm();
    let top = p.label();
    let spin = p.label();
    let spun = p.label();
    let yes = p.label();
    let end = p.end();
    p.emit(Instruction::constant(3, nat(m)))
        .emit(Instruction::constant(9, nat(delay)));
    p.divmod(1, 3, 4, 5, 6);
    // wasted work: x * delay iterations
    p.emit(Instruction::zero(7));
    p.bind(top);
    p.jump_eq(7, 1, yes);
    p.emit(Instruction::zero(8));
    p.bind(spin);
    p.jump_eq(8, 9, spun).emit(Instruction::succ(8)).goto(spin);
    p.bind(spun);
    p.emit(Instruction::succ(7)).goto(top);
    p.bind(yes);
    let zero_rem = p.label();
    p.emit(Instruction::zero(10)).jump_eq(5, 10, zero_rem).goto(end);
    p.bind(zero_rem);
    p.emit(Instruction::succ(0));
    p.finish()
}
