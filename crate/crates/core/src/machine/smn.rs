//! Program specialization and the recursion theorem.



use super::eval::eval;
use super::library::{self_apply, Asm};
use super::numbering::{decode_program, encode_program, ProgramIndex};
use super::program::{Instruction, Program};
use crate::{Error, Nat, Result};

/// Fixes the first `fixed.len()` arguments of program `e`.
///
/// With `F` one past the highest register of `e`, the result is
///
/// ```text
/// C F k                 header: scratch register F holds the arity k
/// C F+i fixed[i-1]      for i in 1..=k
/// <body of e>           R0 stays, R1..Rk -> R(F+i), R(j>k) -> R(j-k)
/// ```
///
/// so the remaining arguments arrive where the body expects them. The
/// header makes the map injective and costs `k + 1` steps.
pub fn smn(e: &ProgramIndex, fixed: &[Nat]) -> ProgramIndex {
    let p = decode_program(e);
    let k = Nat::from(fixed.len());
    let span = p.register_span();
    let shift = Nat::from(fixed.len() + 1);

    let mut out = Vec::with_capacity(p.len() + fixed.len() + 1);
    out.push(Instruction::Const(span.clone(), k.clone()));
    for (i, v) in fixed.iter().enumerate() {
        out.push(Instruction::Const(&span + (i + 1), v.clone()));
    }
    let reg = |r: &Nat| -> Nat {
        if r == &Nat::from(0u32) {
            r.clone()
        } else if r <= &k {
            &span + r
        } else {
            r - &k
        }
    };
    let target = |q: &Nat| q + &shift;
    out.extend(p.instructions.iter().map(|ins| ins.relocate(reg, target)));
    encode_program(&Program::new(out))
}

/// A fixed point of the transformer computed by program `t`: the returned
/// index `n` satisfies `phi_n = phi_{phi_t(n)}` on unary inputs.
///
/// With `d(u) = smn(W, (u,))` where `W(u, x) = phi_{phi_u(u)}(x)`, and `v` an
/// index for `u -> phi_t(d(u))`, the fixed point is `d(v)`.
pub fn fix(t: &ProgramIndex) -> ProgramIndex {
    let w = encode_program(&self_apply());
    let mut v = Asm::new();
    v.emit(Instruction::constant(2, w.0.clone()));
    v.emit(Instruction::specialize(2, 1, 3));
    v.emit(Instruction::constant(4, t.0.clone()));
    v.emit(Instruction::call(4, 3, 0));
    let v = encode_program(&v.finish());
    smn(&w, &[v.0])
}

/// The fixed point together with `phi_t(fix(t))`, run for at most `budget`
/// steps.
pub fn fix_image(t: &ProgramIndex, budget: u64) -> Result<(ProgramIndex, ProgramIndex)> {
    let n = fix(t);
    match eval(t, std::slice::from_ref(&n.0), budget).value() {
        Some(image) => Ok((n, ProgramIndex(image.clone()))),
        None => Err(Error::ExhaustedTransformer { budget }),
    }
}

/// Number of extra steps `smn` adds in front of the specialized body.
pub fn smn_overhead(fixed: usize) -> u64 {
    fixed as u64 + 1
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::nat;
    use crate::machine::programs::{add, constant_maker, successor};
    use crate::machine::{eval, EvalStatus};

    #[test]
    fn specializing_add() {
        let e = encode_program(&add());
        let s = smn(&e, &[nat(3)]);
        assert_eq!(eval(&s, &[nat(4)], 1000).value(), Some(&nat(7)));
    }

    #[test]
    fn empty_specialization_shifts_budget_by_one() {
        let e = encode_program(&add());
        let s = smn(&e, &[]);
        let args = [nat(2), nat(5)];
        let direct = eval(&e, &args, 500);
        let spec = eval(&s, &args, 501);
        assert_eq!(direct.status, spec.status);
        assert_eq!(direct.steps_used + 1, spec.steps_used);
    }

    #[test]
    fn fixed_point_of_constant_transformer_is_successor() {
        // t(e) = index of the successor program, for every e
        let succ = encode_program(&successor());
        let mut t = Asm::new();
        t.emit(Instruction::constant(0, succ.0.clone()));
        let t = encode_program(&t.finish());
        let n = fix(&t);
        for x in 0..5u64 {
            assert_eq!(eval(&n, &[nat(x)], 1000).value(), Some(&nat(x + 1)));
        }
    }

    #[test]
    fn quine() {
        let t = encode_program(&constant_maker());
        let n = fix(&t);
        let out = eval(&n, &[], 1000);
        assert_eq!(out.status, EvalStatus::Halted(n.0.clone()));
    }

    #[test]
    fn identity_transformer_is_well_defined() {
        let t = encode_program(&crate::machine::programs::identity());
        let (n, image) = fix_image(&t, 100).unwrap();
        assert_eq!(n, image);
    }

    #[test]
    fn diverging_transformer_reports_exhaustion() {
        let t = encode_program(&crate::machine::programs::diverge());
        assert_eq!(
            fix_image(&t, 50).unwrap_err(),
            Error::ExhaustedTransformer { budget: 50 }
        );
    }
}
