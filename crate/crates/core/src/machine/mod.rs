//! The concrete machine model behind the numbering of partial functions.

mod eval;
mod library;
mod numbering;
mod program;
mod smn;
mod we;

pub use eval::{diagonal, eval, eval_program, eval_with, EvalOutcome, EvalStatus};
pub use library::{asm, Asm, Label};
pub use numbering::{decode_program, encode_program, ProgramIndex};
pub use program::{Instruction, Program};
pub use smn::{fix, fix_image, smn, smn_overhead};
pub use we::{we_enumerate, we_truncate, Entrant};

pub mod programs {
    //! Index builders for the standard programs used across the crate.
    pub use super::library::*;
}
