//! Zero-day sampling and rule-based compromise propagation.
//!
//! Each outcome starts from a vulnerable set of implementation types. A
//! component falls when enough of its deployed instances are vulnerable,
//! and a non-sensor component with inputs also falls when enough of its
//! inputs have fallen. Stealthy attacks need *all* instances / inputs,
//! non-stealthy ones a majority (exactly half counts).

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComponentKind, Design, Instance, TypeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackModel {
    Stealthy,
    NonStealthy,
}

impl AttackModel {
    /// Whether `hit` out of `total` reaches this model's threshold.
    #[inline]
    fn reached(self, hit: usize, total: usize) -> bool {
        match self {
            AttackModel::Stealthy => hit == total,
            AttackModel::NonStealthy => 2 * hit >= total,
        }
    }
}

impl std::str::FromStr for AttackModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "stealthy" => Ok(AttackModel::Stealthy),
            "nonstealthy" | "non-stealthy" | "non_stealthy" => Ok(AttackModel::NonStealthy),
            other => Err(format!("unknown attack model `{other}`")),
        }
    }
}

/// Implementation types with a discovered zero-day.
pub type VulnerableSet = TypeSet;

/// Compromised components, indexed by position in the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompromisedSet(FixedBitSet);

impl CompromisedSet {
    pub fn empty(num_components: usize) -> Self {
        CompromisedSet(FixedBitSet::with_capacity(num_components))
    }

    pub fn full(num_components: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(num_components);
        bits.insert_range(..);
        CompromisedSet(bits)
    }

    pub fn from_indices(num_components: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(num_components);
        for idx in indices {
            set.insert(idx);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.contains(idx)
    }

    pub fn insert(&mut self, idx: usize) {
        self.0.insert(idx);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_subset(&self, other: &CompromisedSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    /// Component ids in ascending order; the key format used by impact tables.
    pub fn ids(&self, instance: &Instance) -> Vec<String> {
        let mut ids: Vec<String> = self
            .iter()
            .map(|c| instance.component(c).id.0.clone())
            .collect();
        ids.sort();
        ids
    }
}

impl fmt::Display for CompromisedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, c) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Least fixed point of the compromise rules.
pub fn propagate(
    instance: &Instance,
    design: &Design,
    vulnerable: VulnerableSet,
    attack: AttackModel,
) -> CompromisedSet {
    propagate_from(
        instance,
        design,
        vulnerable,
        attack,
        &CompromisedSet::empty(instance.num_components()),
    )
}

/// Least fixed point of the compromise rules that contains `seed`.
pub fn propagate_from(
    instance: &Instance,
    design: &Design,
    vulnerable: VulnerableSet,
    attack: AttackModel,
    seed: &CompromisedSet,
) -> CompromisedSet {
    let n = instance.num_components();
    let mut compromised = seed.clone();
    let mut worklist = VecDeque::new();

    for c in 0..n {
        if compromised.contains(c) {
            worklist.push_back(c);
            continue;
        }
        let deployed = design.deployed(c);
        // An empty deployment satisfies the instance rule under both models.
        if attack.reached(deployed.intersection(vulnerable).len(), deployed.len()) {
            compromised.insert(c);
            worklist.push_back(c);
        }
    }

    let mut fallen_inputs = vec![0usize; n];
    while let Some(c) = worklist.pop_front() {
        for &succ in instance.successors(c) {
            if compromised.contains(succ) || instance.kind(succ) == ComponentKind::Sensor {
                continue;
            }
            fallen_inputs[succ] += 1;
            if attack.reached(fallen_inputs[succ], instance.inputs(succ).len()) {
                compromised.insert(succ);
                worklist.push_back(succ);
            }
        }
    }

    compromised
}

/// Draws one vulnerable set: every deployed type independently with
/// probability `1 - S` of its chosen level. Undeployed types never appear.
pub fn sample_vulnerable<R: Rng + ?Sized>(
    instance: &Instance,
    design: &Design,
    rng: &mut R,
) -> VulnerableSet {
    let mut vulnerable = TypeSet::EMPTY;
    for ty in design.deployed_types().iter() {
        let secure = instance.secure_prob(ty, design.level(ty));
        if rng.gen::<f64>() >= secure {
            vulnerable.insert(ty);
        }
    }
    vulnerable
}

/// Probability that exactly `vulnerable` (among the deployed types) is the
/// vulnerable set.
pub fn outcome_probability(
    instance: &Instance,
    design: &Design,
    vulnerable: VulnerableSet,
) -> Result<f64> {
    let deployed = design.deployed_types();
    if !vulnerable.is_subset(deployed) {
        return Err(Error::Domain(format!(
            "vulnerable set {vulnerable} contains undeployed types (deployed: {deployed})"
        )));
    }
    Ok(deployed
        .iter()
        .map(|ty| {
            let secure = instance.secure_prob(ty, design.level(ty));
            if vulnerable.contains(ty) {
                1.0 - secure
            } else {
                secure
            }
        })
        .product())
}
