//! Uniform reductions from bounded DNR functions to strongly non-recursive
//! ones, the infinitely-often-equal construction, and a budgeted simulation
//! of the forcing construction for the low DNR hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::oracle::FunctionOracle;
use crate::{Nat, Result};

mod avoid;
mod forcing;
mod given_g;
mod given_h;
mod kms;

pub use avoid::{avoid_multiple, avoid_query};
pub use forcing::{compute_pi, forcing_run, query_program, Branch, ForcingConfig, ForcingState, StageRecord};
pub use given_g::{dnr_to_snpr_given_g, projection_index, GivenG};
pub use given_h::{dnr_to_snpr_given_h, transpose_index, GivenH, Interval};
pub use kms::{io_match_construct, table_program, IoMatchTrace, IoStage};

type Apply = dyn Fn(&FunctionOracle, &Nat) -> Result<Nat> + Send + Sync;
type Use = dyn Fn(&Nat) -> Result<BTreeSet<Nat>> + Send + Sync;

/// An oracle computation together with its use: `apply` queries the oracle
/// only at arguments in `use_set(input)`.
#[derive(Clone)]
pub struct Reduction {
    pub source: &'static str,
    pub parameters: BTreeMap<String, String>,
    apply: Arc<Apply>,
    uses: Arc<Use>,
}

impl Reduction {
    pub(crate) fn new(
        source: &'static str,
        parameters: BTreeMap<String, String>,
        apply: impl Fn(&FunctionOracle, &Nat) -> Result<Nat> + Send + Sync + 'static,
        uses: impl Fn(&Nat) -> Result<BTreeSet<Nat>> + Send + Sync + 'static,
    ) -> Self {
        Reduction {
            source,
            parameters,
            apply: Arc::new(apply),
            uses: Arc::new(uses),
        }
    }

    pub fn apply(&self, oracle: &FunctionOracle, input: &Nat) -> Result<Nat> {
        (self.apply)(oracle, input)
    }

    pub fn apply_u64(&self, oracle: &FunctionOracle, input: u64) -> Result<Nat> {
        self.apply(oracle, &Nat::from(input))
    }

    pub fn use_set(&self, input: &Nat) -> Result<BTreeSet<Nat>> {
        (self.uses)(input)
    }
}

impl fmt::Debug for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reduction")
            .field("source", &self.source)
            .field("parameters", &self.parameters)
            .finish_non_exhaustive()
    }
}
