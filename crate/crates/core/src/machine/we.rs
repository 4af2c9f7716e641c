//! Stage approximations `W_{e,s}` of the domain of program `e`.

use serde::{Deserialize, Serialize};

use super::eval::eval;
use super::numbering::ProgramIndex;
use crate::nat;

/// An element of `W_{e,s}` with the stage at which it entered: the least
/// `t >= x` by which `phi_e(x)` has halted within `t` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entrant {
    pub x: u64,
    pub stage: u64,
}

/// `W_{e,s} = { x <= s : phi_e(x) halts within s steps }` in entry order
/// (entry stage, then x). Later stages only append.
pub fn we_enumerate(e: &ProgramIndex, s: u64) -> Vec<Entrant> {
    let mut out: Vec<Entrant> = (0..=s)
        .filter_map(|x| {
            let r = eval(e, &[nat(x)], s);
            r.halted().then(|| Entrant {
                x,
                stage: r.steps_used.max(x),
            })
        })
        .collect();
    out.sort_by_key(|en| (en.stage, en.x));
    out
}

/// `W_{e,s}#u`: the entrants that found at most `u` others already present,
/// i.e. the first `u + 1` in entry order.
pub fn we_truncate(e: &ProgramIndex, s: u64, u: u64) -> Vec<Entrant> {
    let mut all = we_enumerate(e, s);
    all.truncate(usize::try_from(u.saturating_add(1)).unwrap_or(usize::MAX));
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::programs::{diverge, halt_on_evens};
    use crate::machine::encode_program;

    fn xs(v: &[Entrant]) -> Vec<u64> {
        v.iter().map(|en| en.x).collect()
    }

    #[test]
    fn diverging_program_enumerates_nothing() {
        assert!(we_enumerate(&encode_program(&diverge()), 1000).is_empty());
    }

    #[test]
    fn empty_program_enumerates_everything() {
        let e = ProgramIndex::from(0);
        assert_eq!(xs(&we_enumerate(&e, 12)), (0..=12).collect::<Vec<_>>());
    }

    #[test]
    fn evens_truncated_to_three() {
        let e = encode_program(&halt_on_evens());
        assert_eq!(xs(&we_truncate(&e, 60, 2)), vec![0, 2, 4]);
    }

    #[test]
    fn stages_extend_as_prefixes() {
        let e = encode_program(&halt_on_evens());
        let mut prev = we_enumerate(&e, 0);
        for s in 1..40 {
            let next = we_enumerate(&e, s);
            assert_eq!(&next[..prev.len()], &prev[..], "stage {s}");
            prev = next;
        }
    }
}
