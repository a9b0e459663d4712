use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{
    ComponentId, ComponentKind, ImplementationCatalog, ImplementationId, SystemModel,
    MAX_IMPLEMENTATION_TYPES,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateComponent(ComponentId),
    DanglingInput {
        component: ComponentId,
        input: ComponentId,
    },
    DuplicateInput {
        component: ComponentId,
        input: ComponentId,
    },
    SelfLoop(ComponentId),
    SensorWithInputs(ComponentId),
    EmptyAllowed(ComponentId),
    DuplicateAllowed {
        component: ComponentId,
        implementation: ImplementationId,
    },
    UnknownImplementation {
        component: ComponentId,
        implementation: ImplementationId,
    },
    DuplicateImplementation(ImplementationId),
    NoLevels(ImplementationId),
    NonIncreasingLevelCost {
        implementation: ImplementationId,
        level: usize,
    },
    DecreasingSecureProb {
        implementation: ImplementationId,
        level: usize,
    },
    SecureProbOutOfRange {
        implementation: ImplementationId,
        level: usize,
    },
    TooManyImplementations(usize),
    /// Water-scenario inconsistency.
    Scenario(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateComponent(c) => write!(f, "duplicate component id `{c}`"),
            DanglingInput { component, input } => {
                write!(f, "dangling input: `{component}` reads missing component `{input}`")
            }
            DuplicateInput { component, input } => {
                write!(f, "component `{component}` lists input `{input}` more than once")
            }
            SelfLoop(c) => write!(f, "self-loop on component `{c}`"),
            SensorWithInputs(c) => write!(f, "sensor `{c}` has cyber inputs"),
            EmptyAllowed(c) => write!(f, "component `{c}` has no allowed implementation types"),
            DuplicateAllowed {
                component,
                implementation,
            } => write!(
                f,
                "component `{component}` lists implementation `{implementation}` more than once"
            ),
            UnknownImplementation {
                component,
                implementation,
            } => write!(
                f,
                "component `{component}` allows `{implementation}`, which is not in the catalog"
            ),
            DuplicateImplementation(i) => write!(f, "duplicate implementation id `{i}`"),
            NoLevels(i) => write!(f, "implementation `{i}` has no hardening levels"),
            NonIncreasingLevelCost {
                implementation,
                level,
            } => write!(
                f,
                "non-increasing level cost: `{implementation}` level {level} costs no more than level {}",
                level - 1
            ),
            DecreasingSecureProb {
                implementation,
                level,
            } => write!(
                f,
                "`{implementation}` level {level} is less secure than level {}",
                level - 1
            ),
            SecureProbOutOfRange {
                implementation,
                level,
            } => write!(
                f,
                "`{implementation}` level {level} has a secure probability outside [0, 1]"
            ),
            TooManyImplementations(n) => write!(
                f,
                "catalog has {n} implementation types; at most {MAX_IMPLEMENTATION_TYPES} are supported"
            ),
            Scenario(msg) => write!(f, "scenario: {msg}"),
        }
    }
}

/// Every invariant violation found in a model/catalog pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

pub fn validate_model(model: &SystemModel, catalog: &ImplementationCatalog) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut type_ids = HashSet::new();
    for ty in &catalog.types {
        if !type_ids.insert(&ty.id) {
            report.push(Violation::DuplicateImplementation(ty.id.clone()));
        }
        if ty.levels.is_empty() {
            report.push(Violation::NoLevels(ty.id.clone()));
        }
        for (l, level) in ty.levels.iter().enumerate() {
            if !(0.0..=1.0).contains(&level.secure_prob) {
                report.push(Violation::SecureProbOutOfRange {
                    implementation: ty.id.clone(),
                    level: l,
                });
            }
            if l > 0 {
                let prev = &ty.levels[l - 1];
                if level.raw_cost <= prev.raw_cost {
                    report.push(Violation::NonIncreasingLevelCost {
                        implementation: ty.id.clone(),
                        level: l,
                    });
                }
                if level.secure_prob < prev.secure_prob {
                    report.push(Violation::DecreasingSecureProb {
                        implementation: ty.id.clone(),
                        level: l,
                    });
                }
            }
        }
    }
    if catalog.types.len() > MAX_IMPLEMENTATION_TYPES {
        report.push(Violation::TooManyImplementations(catalog.types.len()));
    }

    let mut component_ids: HashMap<&ComponentId, usize> = HashMap::new();
    for c in &model.components {
        *component_ids.entry(&c.id).or_default() += 1;
    }
    let mut reported_dup = HashSet::new();
    for c in &model.components {
        if component_ids[&c.id] > 1 && reported_dup.insert(&c.id) {
            report.push(Violation::DuplicateComponent(c.id.clone()));
        }

        let mut seen_inputs = HashSet::new();
        for input in &c.inputs {
            if input == &c.id {
                report.push(Violation::SelfLoop(c.id.clone()));
            } else if !component_ids.contains_key(input) {
                report.push(Violation::DanglingInput {
                    component: c.id.clone(),
                    input: input.clone(),
                });
            }
            if !seen_inputs.insert(input) {
                report.push(Violation::DuplicateInput {
                    component: c.id.clone(),
                    input: input.clone(),
                });
            }
        }
        if c.kind == ComponentKind::Sensor && !c.inputs.is_empty() {
            report.push(Violation::SensorWithInputs(c.id.clone()));
        }

        if c.allowed.is_empty() {
            report.push(Violation::EmptyAllowed(c.id.clone()));
        }
        let mut seen_allowed = HashSet::new();
        for imp in &c.allowed {
            if !type_ids.contains(imp) {
                report.push(Violation::UnknownImplementation {
                    component: c.id.clone(),
                    implementation: imp.clone(),
                });
            }
            if !seen_allowed.insert(imp) {
                report.push(Violation::DuplicateAllowed {
                    component: c.id.clone(),
                    implementation: imp.clone(),
                });
            }
        }
    }

    report
}
