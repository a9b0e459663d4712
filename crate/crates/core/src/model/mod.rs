//! System graph, implementation catalog, budgets and designs.
//!
//! The serde-facing types ([`SystemModel`], [`ImplementationCatalog`]) are
//! plain data and may violate invariants; [`validate_model`] reports every
//! violation. An [`Instance`] is the validated, index-resolved pairing of the
//! two that every algorithm in the crate works on. Components and
//! implementation types are addressed by their position in the model and
//! catalog lists.

mod cost;
mod design;
mod validate;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cost::{diversity_cost, hardening_cost, is_feasible, redundancy_cost, CostBreakdown};
pub use design::{Design, NamedDesign, TypeSet};
pub use validate::{validate_model, ValidationReport, Violation};

/// Money in integral minor units.
pub type Money = u64;

/// Upper bound on catalog size; type sets are stored as 64-bit masks.
pub const MAX_IMPLEMENTATION_TYPES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImplementationId(pub String);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for ImplementationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ComponentId {
    fn from(s: &str) -> Self {
        ComponentId(s.to_owned())
    }
}

impl From<&str> for ImplementationId {
    fn from(s: &str) -> Self {
        ImplementationId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// Measures the physical process; has no cyber inputs.
    Sensor,
    Actuator,
    Processing,
    /// Human-machine interface; the end of every alert chain.
    Interface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: ComponentId,
    pub kind: ComponentKind,
    /// Origins of the incoming edges.
    #[serde(default)]
    pub inputs: Vec<ComponentId>,
    /// Implementation types this component may be built from.
    pub allowed: Vec<ImplementationId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemModel {
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardeningLevel {
    /// Probability that no zero-day is found in the type at this level.
    #[serde(rename = "S")]
    pub secure_prob: f64,
    /// Raw cost of attaining the level.
    #[serde(rename = "H")]
    pub raw_cost: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplementationType {
    pub id: ImplementationId,
    /// Cost of each deployed instance.
    #[serde(rename = "R")]
    pub deploy_cost: Money,
    /// One-time cost of adopting the type anywhere in the system.
    #[serde(rename = "D")]
    pub adoption_cost: Money,
    /// Ordered from cheapest to most expensive.
    pub levels: Vec<HardeningLevel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImplementationCatalog {
    pub types: Vec<ImplementationType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BudgetConfig {
    /// Separate caps on redundancy, diversity and hardening spend.
    Split {
        #[serde(rename = "R")]
        redundancy: Money,
        #[serde(rename = "D")]
        diversity: Money,
        #[serde(rename = "H")]
        hardening: Money,
    },
    /// A single cap on the total spend.
    Combined(Money),
}

impl BudgetConfig {
    pub fn split(redundancy: Money, diversity: Money, hardening: Money) -> Self {
        BudgetConfig::Split {
            redundancy,
            diversity,
            hardening,
        }
    }

    pub fn admits(&self, costs: &CostBreakdown) -> bool {
        match *self {
            BudgetConfig::Split {
                redundancy,
                diversity,
                hardening,
            } => {
                costs.redundancy <= redundancy
                    && costs.diversity <= diversity
                    && costs.hardening <= hardening
            }
            BudgetConfig::Combined(total) => costs.total() <= total,
        }
    }
}

/// A validated model/catalog pair with resolved indices.
#[derive(Debug, Clone)]
pub struct Instance {
    model: SystemModel,
    catalog: ImplementationCatalog,
    component_index: HashMap<ComponentId, usize>,
    type_index: HashMap<ImplementationId, usize>,
    inputs: Vec<Vec<usize>>,
    successors: Vec<Vec<usize>>,
    allowed: Vec<TypeSet>,
}

impl Instance {
    pub fn new(model: SystemModel, catalog: ImplementationCatalog) -> Result<Self> {
        let report = validate_model(&model, &catalog);
        if !report.is_empty() {
            return Err(Error::Validation(report));
        }
        let component_index: HashMap<_, _> = model
            .components
            .iter()
            .enumerate()
            .map(|(idx, c)| (c.id.clone(), idx))
            .collect();
        let type_index: HashMap<_, _> = catalog
            .types
            .iter()
            .enumerate()
            .map(|(idx, t)| (t.id.clone(), idx))
            .collect();

        let n = model.components.len();
        let mut inputs = Vec::with_capacity(n);
        let mut successors = vec![Vec::new(); n];
        let mut allowed = Vec::with_capacity(n);
        for (idx, component) in model.components.iter().enumerate() {
            let ins: Vec<usize> = component
                .inputs
                .iter()
                .map(|id| component_index[id])
                .collect();
            for &origin in &ins {
                successors[origin].push(idx);
            }
            inputs.push(ins);
            allowed.push(
                component
                    .allowed
                    .iter()
                    .map(|id| type_index[id])
                    .collect::<TypeSet>(),
            );
        }

        Ok(Instance {
            model,
            catalog,
            component_index,
            type_index,
            inputs,
            successors,
            allowed,
        })
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn catalog(&self) -> &ImplementationCatalog {
        &self.catalog
    }

    pub fn num_components(&self) -> usize {
        self.model.components.len()
    }

    pub fn num_types(&self) -> usize {
        self.catalog.types.len()
    }

    pub fn component(&self, idx: usize) -> &Component {
        &self.model.components[idx]
    }

    pub fn implementation(&self, idx: usize) -> &ImplementationType {
        &self.catalog.types[idx]
    }

    pub fn kind(&self, idx: usize) -> ComponentKind {
        self.model.components[idx].kind
    }

    pub fn component_index(&self, id: &ComponentId) -> Option<usize> {
        self.component_index.get(id).copied()
    }

    pub fn type_index(&self, id: &ImplementationId) -> Option<usize> {
        self.type_index.get(id).copied()
    }

    /// Indices of the components feeding `idx`.
    pub fn inputs(&self, idx: usize) -> &[usize] {
        &self.inputs[idx]
    }

    /// Indices of the components fed by `idx`.
    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.successors[idx]
    }

    pub fn allowed(&self, idx: usize) -> TypeSet {
        self.allowed[idx]
    }

    pub fn num_levels(&self, ty: usize) -> usize {
        self.catalog.types[ty].levels.len()
    }

    pub fn secure_prob(&self, ty: usize, level: usize) -> f64 {
        self.catalog.types[ty].levels[level].secure_prob
    }
}
