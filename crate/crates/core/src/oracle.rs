//! Total function oracles with a query log (the "use" of a computation).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::machine::{diagonal, eval, ProgramIndex};
use crate::{nat, Nat};

type Source = Arc<dyn Fn(&Nat) -> Nat + Send + Sync>;

/// A total map on the naturals. Answers are cached on first query, so
/// repeated queries agree even when the source is expensive.
pub struct FunctionOracle {
    source: Source,
    label: String,
    memo: Mutex<HashMap<Nat, Nat>>,
    log: Mutex<Vec<Nat>>,
}

impl FunctionOracle {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(&Nat) -> Nat + Send + Sync + 'static) -> Self {
        FunctionOracle {
            source: Arc::new(f),
            label: label.into(),
            memo: Mutex::default(),
            log: Mutex::default(),
        }
    }

    /// Table lookup with `default` off the table.
    pub fn from_table(table: BTreeMap<Nat, Nat>, default: Nat) -> Self {
        let label = format!("table[{}]", table.len());
        FunctionOracle::from_fn(label, move |x| table.get(x).cloned().unwrap_or_else(|| default.clone()))
    }

    /// `x -> phi_e(x)` within `budget` steps, `fallback` where it does not halt.
    pub fn from_program(e: ProgramIndex, budget: u64, fallback: Nat) -> Self {
        let label = format!("program:{e},{budget}");
        FunctionOracle::from_fn(label, move |x| {
            eval(&e, std::slice::from_ref(x), budget)
                .value()
                .cloned()
                .unwrap_or_else(|| fallback.clone())
        })
    }

    /// Uniform values below `bound(x)` that avoid `phi_x(x)` whenever that
    /// halts within `budget`: an oracle that is DNR at every argument, as far
    /// as the budget can tell. Values depend only on `(seed, x)`.
    pub fn random_dnr(
        seed: u64,
        budget: u64,
        bound: impl Fn(&Nat) -> u64 + Send + Sync + 'static,
    ) -> Self {
        FunctionOracle::from_fn(format!("random-dnr:{seed},{budget}"), move |x| {
            let b = bound(x);
            let forbidden = diagonal(x, budget)
                .as_ref()
                .and_then(ToPrimitive::to_u64)
                .filter(|v| *v < b);
            let mut rng = rng_for(seed, x);
            match forbidden {
                Some(bad) if b >= 2 => {
                    let v = rng.gen_range(0..b - 1);
                    nat(if v >= bad { v + 1 } else { v })
                }
                _ => nat(rng.gen_range(0..b.max(1))),
            }
        })
    }

    /// Uniform values below `bound(x)`, no avoidance.
    pub fn random_bounded(seed: u64, bound: impl Fn(&Nat) -> u64 + Send + Sync + 'static) -> Self {
        FunctionOracle::from_fn(format!("random:{seed}"), move |x| {
            nat(rng_for(seed, x).gen_range(0..bound(x).max(1)))
        })
    }

    pub fn query(&self, x: &Nat) -> Nat {
        self.log.lock().expect("log poisoned").push(x.clone());
        let cached = self.memo.lock().expect("memo poisoned").get(x).cloned();
        if let Some(v) = cached {
            return v;
        }
        let v = (self.source)(x);
        self.memo
            .lock()
            .expect("memo poisoned")
            .entry(x.clone())
            .or_insert(v)
            .clone()
    }

    pub fn query_u64(&self, x: u64) -> Nat {
        self.query(&nat(x))
    }

    /// Every argument queried so far, in order, with repetitions.
    pub fn query_log(&self) -> Vec<Nat> {
        self.log.lock().expect("log poisoned").clone()
    }

    pub fn queried(&self) -> BTreeSet<Nat> {
        self.query_log().into_iter().collect()
    }

    pub fn clear_log(&self) {
        self.log.lock().expect("log poisoned").clear();
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

fn rng_for(seed: u64, x: &Nat) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for d in x.iter_u64_digits().chain(std::iter::once(x.bits())) {
        h = splitmix(h ^ d);
    }
    if x.is_zero() {
        h = splitmix(h);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
