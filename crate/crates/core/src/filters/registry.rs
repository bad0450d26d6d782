//! Named update rules selectable at runtime.
//!
//! Every rule advances a [`FilterState`] by one iteration. The built-in
//! registry carries `lms`, `lp`, `lpgc`, `lpngc` and `lpngc-lagged`, the last
//! reading the windowed comparator before the current gate is pushed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filters::state::{Algorithm, FilterState, NgcOrdering};

pub trait UpdateRule: Send + Sync {
    /// Registry key, also used for output column names.
    fn name(&self) -> &str;

    /// Family of the state this rule advances.
    fn family(&self) -> Algorithm;

    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> Result<()>;
}

impl fmt::Debug for dyn UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UpdateRule({})", self.name())
    }
}

pub struct Lms;

impl UpdateRule for Lms {
    fn name(&self) -> &str {
        "lms"
    }
    fn family(&self) -> Algorithm {
        Algorithm::Lms
    }
    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> Result<()> {
        state.apply_lms(x, e)
    }
}

pub struct LpLms;

impl UpdateRule for LpLms {
    fn name(&self) -> &str {
        "lp"
    }
    fn family(&self) -> Algorithm {
        Algorithm::LpLms
    }
    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> Result<()> {
        state.apply_lp(x, e)
    }
}

pub struct LpGc;

impl UpdateRule for LpGc {
    fn name(&self) -> &str {
        "lpgc"
    }
    fn family(&self) -> Algorithm {
        Algorithm::LpGc
    }
    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> Result<()> {
        state.apply_gc(x, e)
    }
}

pub struct LpNgc {
    pub ordering: NgcOrdering,
}

impl UpdateRule for LpNgc {
    fn name(&self) -> &str {
        match self.ordering {
            NgcOrdering::Concurrent => "lpngc",
            NgcOrdering::Lagged => "lpngc-lagged",
        }
    }
    fn family(&self) -> Algorithm {
        Algorithm::LpNgc
    }
    fn apply(&self, state: &mut FilterState, x: &[f64], e: f64) -> Result<()> {
        state.apply_ngc(x, e, self.ordering)
    }
}

#[derive(Clone, Debug)]
pub struct Registry {
    rules: BTreeMap<String, Arc<dyn UpdateRule>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            rules: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Arc::new(Lms));
        r.register(Arc::new(LpLms));
        r.register(Arc::new(LpGc));
        r.register(Arc::new(LpNgc {
            ordering: NgcOrdering::Concurrent,
        }));
        r.register(Arc::new(LpNgc {
            ordering: NgcOrdering::Lagged,
        }));
        r
    }

    /// Adds `rule`, replacing any rule already registered under its name.
    pub fn register(&mut self, rule: Arc<dyn UpdateRule>) {
        self.rules.insert(rule.name().to_string(), rule);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn UpdateRule>> {
        self.rules
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.rules.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}
