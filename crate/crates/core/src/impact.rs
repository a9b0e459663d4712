//! Impact evaluators: the loss inflicted by a compromised component set.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComponentId, Instance};
use crate::propagation::CompromisedSet;

/// A deterministic, non-negative score for a compromised set.
pub trait ImpactEvaluator: Sync {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64>;

    /// True when `A ⊆ B` implies `impact(A) <= impact(B)`.
    fn is_monotone(&self) -> bool {
        false
    }
}

impl<T: ImpactEvaluator + ?Sized> ImpactEvaluator for &T {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64> {
        (**self).impact(compromised)
    }

    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
}

impl<T: ImpactEvaluator + ?Sized> ImpactEvaluator for Box<T> {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64> {
        (**self).impact(compromised)
    }

    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
}

/// Number of compromised components.
#[derive(Debug, Clone, Copy, Default)]
pub struct CountImpact;

pub fn impact_count(compromised: &CompromisedSet) -> f64 {
    compromised.len() as f64
}

impl ImpactEvaluator for CountImpact {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64> {
        Ok(impact_count(compromised))
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// On-disk impact table: exact-match entries keyed by component-id lists,
/// with an optional fallback.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactTableFile {
    #[serde(default)]
    pub entries: Vec<ImpactTableEntry>,
    #[serde(default)]
    pub default: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactTableEntry {
    pub set: Vec<ComponentId>,
    pub value: f64,
}

/// Precomputed impacts, e.g. from an external simulator.
#[derive(Debug, Clone)]
pub struct TableImpact {
    entries: HashMap<CompromisedSet, f64>,
    default: Option<f64>,
    monotone: bool,
}

impl TableImpact {
    pub fn new(instance: &Instance, file: &ImpactTableFile) -> Result<Self> {
        let n = instance.num_components();
        let mut entries = HashMap::with_capacity(file.entries.len());
        for entry in &file.entries {
            if entry.value.is_nan() || entry.value < 0.0 {
                return Err(Error::Domain(format!(
                    "impact table value {} is negative or NaN",
                    entry.value
                )));
            }
            let mut key = CompromisedSet::empty(n);
            for id in &entry.set {
                let idx = instance.component_index(id).ok_or_else(|| {
                    Error::Domain(format!("impact table references unknown component `{id}`"))
                })?;
                key.insert(idx);
            }
            if entries.insert(key, entry.value).is_some() {
                return Err(Error::Domain(format!(
                    "impact table lists {:?} more than once",
                    entry.set
                )));
            }
        }
        if let Some(d) = file.default {
            if d.is_nan() || d < 0.0 {
                return Err(Error::Domain(format!(
                    "impact table default {d} is negative"
                )));
            }
        }
        Ok(TableImpact {
            entries,
            default: file.default,
            monotone: false,
        })
    }

    /// Declares the table monotone. Callers are responsible for the claim.
    pub fn assume_monotone(mut self) -> Self {
        self.monotone = true;
        self
    }

    pub fn lookup(&self, compromised: &CompromisedSet) -> Result<f64> {
        self.entries
            .get(compromised)
            .copied()
            .or(self.default)
            .ok_or_else(|| Error::Lookup(compromised.to_string()))
    }
}

/// Exact-match lookup with fallback to the table's default.
pub fn impact_table(compromised: &CompromisedSet, table: &TableImpact) -> Result<f64> {
    table.lookup(compromised)
}

impl ImpactEvaluator for TableImpact {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64> {
        self.lookup(compromised)
    }

    fn is_monotone(&self) -> bool {
        self.monotone
    }
}
