use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ComponentId, ImplementationId, Instance};
use crate::error::{Error, Result};

/// A set of implementation types, stored as a bit mask over catalog indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeSet(u64);

impl TypeSet {
    pub const EMPTY: TypeSet = TypeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        TypeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, ty: usize) -> bool {
        ty < 64 && self.0 >> ty & 1 == 1
    }

    pub fn insert(&mut self, ty: usize) {
        self.0 |= 1 << ty;
    }

    pub fn remove(&mut self, ty: usize) {
        self.0 &= !(1 << ty);
    }

    pub fn with(self, ty: usize) -> Self {
        TypeSet(self.0 | 1 << ty)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: TypeSet) -> Self {
        TypeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: TypeSet) -> Self {
        TypeSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: TypeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let ty = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(ty)
            }
        })
    }
}

impl FromIterator<usize> for TypeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = TypeSet::EMPTY;
        for ty in iter {
            set.insert(ty);
        }
        set
    }
}

impl fmt::Display for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, ty) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{ty}")?;
        }
        f.write_str("}")
    }
}

/// A concrete deployment: which types implement each component and the
/// hardening level index chosen for every type.
///
/// Ordering is lexicographic over `(deployed, levels)`; it is the tie-break
/// order used by the exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Design {
    deployed: Vec<TypeSet>,
    levels: Vec<usize>,
}

impl Design {
    /// Nothing deployed, every type at its cheapest level.
    pub fn empty(instance: &Instance) -> Self {
        Design {
            deployed: vec![TypeSet::EMPTY; instance.num_components()],
            levels: vec![0; instance.num_types()],
        }
    }

    /// Every allowed type deployed everywhere, cheapest levels.
    pub fn full(instance: &Instance) -> Self {
        Design {
            deployed: (0..instance.num_components())
                .map(|c| instance.allowed(c))
                .collect(),
            levels: vec![0; instance.num_types()],
        }
    }

    pub fn from_parts(deployed: Vec<TypeSet>, levels: Vec<usize>) -> Self {
        Design { deployed, levels }
    }

    pub fn deployed(&self, component: usize) -> TypeSet {
        self.deployed[component]
    }

    pub fn deployments(&self) -> &[TypeSet] {
        &self.deployed
    }

    pub fn level(&self, ty: usize) -> usize {
        self.levels[ty]
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn deploy(&mut self, component: usize, ty: usize) {
        self.deployed[component].insert(ty);
    }

    pub fn undeploy(&mut self, component: usize, ty: usize) {
        self.deployed[component].remove(ty);
    }

    pub fn set_level(&mut self, ty: usize, level: usize) {
        self.levels[ty] = level;
    }

    /// Types deployed at one or more components.
    pub fn deployed_types(&self) -> TypeSet {
        self.deployed
            .iter()
            .fold(TypeSet::EMPTY, |acc, &set| acc.union(set))
    }

    pub fn instance_count(&self) -> usize {
        self.deployed.iter().map(|s| s.len()).sum()
    }

    /// Checks the design against the instance: shapes, `r_c ⊆ I_c`, and
    /// level indices within range.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        if self.deployed.len() != instance.num_components() {
            return Err(Error::InvalidDesign(format!(
                "design covers {} components, model has {}",
                self.deployed.len(),
                instance.num_components()
            )));
        }
        if self.levels.len() != instance.num_types() {
            return Err(Error::InvalidDesign(format!(
                "design has {} levels, catalog has {} types",
                self.levels.len(),
                instance.num_types()
            )));
        }
        for (c, &set) in self.deployed.iter().enumerate() {
            if !set.is_subset(instance.allowed(c)) {
                return Err(Error::InvalidDesign(format!(
                    "component `{}` deploys types outside its allowed set",
                    instance.component(c).id
                )));
            }
        }
        for (ty, &level) in self.levels.iter().enumerate() {
            if level >= instance.num_levels(ty) {
                return Err(Error::InvalidDesign(format!(
                    "level index {level} out of range for `{}`",
                    instance.implementation(ty).id
                )));
            }
        }
        Ok(())
    }

    pub fn to_named(&self, instance: &Instance) -> NamedDesign {
        let deployed = self
            .deployed
            .iter()
            .enumerate()
            .map(|(c, set)| {
                (
                    instance.component(c).id.clone(),
                    set.iter()
                        .map(|ty| instance.implementation(ty).id.clone())
                        .collect(),
                )
            })
            .collect();
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(ty, &l)| (instance.implementation(ty).id.clone(), l))
            .collect();
        NamedDesign { deployed, levels }
    }

    pub fn from_named(named: &NamedDesign, instance: &Instance) -> Result<Self> {
        let mut design = Design::empty(instance);
        for (cid, types) in &named.deployed {
            let c = instance
                .component_index(cid)
                .ok_or_else(|| Error::InvalidDesign(format!("unknown component `{cid}`")))?;
            for tid in types {
                let ty = instance.type_index(tid).ok_or_else(|| {
                    Error::InvalidDesign(format!("unknown implementation `{tid}`"))
                })?;
                design.deploy(c, ty);
            }
        }
        for (tid, &level) in &named.levels {
            let ty = instance
                .type_index(tid)
                .ok_or_else(|| Error::InvalidDesign(format!("unknown implementation `{tid}`")))?;
            design.set_level(ty, level);
        }
        design.check(instance)?;
        Ok(design)
    }
}

/// JSON form of a [`Design`]. Levels are 0-based indices into each type's
/// level list; types missing from `levels` sit at index 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDesign {
    #[serde(default)]
    pub deployed: BTreeMap<ComponentId, Vec<ImplementationId>>,
    #[serde(default)]
    pub levels: BTreeMap<ImplementationId, usize>,
}
