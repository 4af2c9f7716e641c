//! Finite-scale workbench for bounded diagonally non-recursive (DNR) and
//! strongly non-recursive (SNR) functions.
//!
//! The crate provides a concrete register-machine numbering with step-bounded
//! evaluation, s-m-n specialization and a constructive recursion theorem; the
//! bushy-tree big/small calculus with exhaustive lemma checkers; uniform
//! reductions between bounded DNR and SNPR classes; and the canonical-immunity
//! and pandemic-numbering constructions. Every infinitary notion is replaced
//! by a horizon or a step budget, and reports say so.

pub mod bushy;
pub mod diag;
pub mod error;
pub mod immunity;
pub mod machine;
mod natser;
pub mod oracle;
pub mod order;
pub mod pairing;
pub mod pandemic;
pub mod reductions;

pub use error::{Error, Result};
pub use machine::{
    decode_program, encode_program, eval, eval_with, fix, smn, EvalOutcome, EvalStatus,
    Instruction, Program, ProgramIndex,
};
pub use oracle::FunctionOracle;
pub use order::{order_validate, OrderFunction, OrderReport};
pub use pairing::{pair, project, tuple_decode, tuple_encode, unpair};

/// Natural numbers. Program indices and register contents grow without bound.
pub type Nat = num_bigint::BigUint;

/// Shorthand for building a [`Nat`] from a machine integer.
pub fn nat(n: u64) -> Nat {
    Nat::from(n)
}
