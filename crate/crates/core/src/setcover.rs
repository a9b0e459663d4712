//! Set Cover → optimal design problem.
//!
//! Each universe element becomes a sensor whose allowed types are the
//! families containing it. Types are free to deploy and adopt, and have an
//! insecure level (S = 0, H = 0) and a secure one (S = 1, H = 1). Under a
//! combined budget of `k`, a stealthy attack and count impact, a zero-risk
//! design exists exactly when `k` families cover the universe.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BudgetConfig, Component, ComponentKind, HardeningLevel, ImplementationCatalog,
    ImplementationType, Money, SystemModel,
};
use crate::propagation::AttackModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetCoverInstance {
    pub universe: Vec<String>,
    pub families: Vec<Vec<String>>,
    pub k: Money,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedInstance {
    pub model: SystemModel,
    pub catalog: ImplementationCatalog,
    pub budgets: BudgetConfig,
    pub attack: AttackModel,
    /// Target risk; the answer to the cover question is "yes" iff the
    /// optimum reaches it.
    pub threshold: f64,
}

/// Type id of family `j`.
pub fn family_id(j: usize) -> String {
    format!("F{j}")
}

pub fn setcover_to_odp(sc: &SetCoverInstance) -> Result<ReducedInstance> {
    let mut seen = BTreeSet::new();
    for u in &sc.universe {
        if !seen.insert(u) {
            return Err(Error::Domain(format!(
                "universe element `{u}` is listed twice"
            )));
        }
    }
    for (j, family) in sc.families.iter().enumerate() {
        if let Some(u) = family.iter().find(|u| !seen.contains(u)) {
            return Err(Error::Domain(format!(
                "family {j} contains `{u}`, which is not in the universe"
            )));
        }
    }

    let mut components = Vec::with_capacity(sc.universe.len());
    for u in &sc.universe {
        let allowed: Vec<_> = sc
            .families
            .iter()
            .enumerate()
            .filter(|(_, f)| f.contains(u))
            .map(|(j, _)| family_id(j).as_str().into())
            .collect();
        if allowed.is_empty() {
            return Err(Error::Domain(format!(
                "universe element `{u}` is not covered by any family"
            )));
        }
        components.push(Component {
            id: u.as_str().into(),
            kind: ComponentKind::Sensor,
            inputs: vec![],
            allowed,
        });
    }

    let types = (0..sc.families.len())
        .map(|j| ImplementationType {
            id: family_id(j).as_str().into(),
            deploy_cost: 0,
            adoption_cost: 0,
            levels: vec![
                HardeningLevel {
                    secure_prob: 0.0,
                    raw_cost: 0,
                },
                HardeningLevel {
                    secure_prob: 1.0,
                    raw_cost: 1,
                },
            ],
        })
        .collect();

    Ok(ReducedInstance {
        model: SystemModel { components },
        catalog: ImplementationCatalog { types },
        budgets: BudgetConfig::Combined(sc.k),
        attack: AttackModel::Stealthy,
        threshold: 0.0,
    })
}
