use crate::error::{Error, Result};
use crate::par::Exec;

/// Default cap on materialized carriers, tables and function spaces.
pub const DEFAULT_MAX_ENTRIES: usize = 65_536;
/// Default number of seeded samples when an exhaustive sweep is over budget.
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_ISO_NODES: u64 = 2_000_000;

/// Resource limits and sweep settings shared by every expensive entry point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    pub max_entries: usize,
    pub iso_node_budget: u64,
    pub samples: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_entries: DEFAULT_MAX_ENTRIES,
            iso_node_budget: DEFAULT_ISO_NODES,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl Options {
    /// Defaults, with `UAG_BUDGET` overriding the size guard when set.
    pub fn from_env() -> Result<Self> {
        let mut opts = Options::default();
        if let Ok(raw) = std::env::var("UAG_BUDGET") {
            opts.max_entries = raw
                .trim()
                .parse()
                .map_err(|_| Error::semantic(format!("UAG_BUDGET is not a count: {raw:?}")))?;
        }
        Ok(opts)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Fails with a budget error if `needed` entries exceed the size guard.
    pub fn guard(&self, what: impl FnOnce() -> String, needed: u128) -> Result<()> {
        if needed > self.max_entries as u128 {
            return Err(Error::Budget {
                what: what(),
                needed,
                limit: self.max_entries,
            });
        }
        Ok(())
    }

    /// Whether all `2^points` subsets of a point space fit the budget.
    pub fn exhaustive_subsets(&self, points: usize) -> bool {
        points < 64 && (1u128 << points) <= self.max_entries as u128
    }
}

/// `base^exp` without overflow; saturates at `u128::MAX`.
pub(crate) fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}
