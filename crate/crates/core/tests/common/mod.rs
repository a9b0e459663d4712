//! Reference implementations written straight from the definitions, kept
//! deliberately naive, plus random tiny instances.
#![allow(dead_code)]

use iiot_design::model::{
    BudgetConfig, Component, ComponentKind, Design, HardeningLevel, ImplementationCatalog,
    ImplementationType, Instance, Money, SystemModel, TypeSet,
};
use iiot_design::propagation::AttackModel;
use rand::seq::SliceRandom;
use rand::Rng;

/// Compromised flags for the least fixed point, by Kleene iteration from
/// the empty set over all components at once.
pub fn naive_propagate(
    model: &SystemModel,
    deployed: &[Vec<usize>],
    vulnerable: &[bool],
    attack: AttackModel,
) -> Vec<bool> {
    naive_propagate_from(
        model,
        deployed,
        vulnerable,
        attack,
        &vec![false; model.components.len()],
    )
}

pub fn naive_propagate_from(
    model: &SystemModel,
    deployed: &[Vec<usize>],
    vulnerable: &[bool],
    attack: AttackModel,
    start: &[bool],
) -> Vec<bool> {
    let threshold = |hit: usize, total: usize| match attack {
        AttackModel::Stealthy => hit == total,
        AttackModel::NonStealthy => 2 * hit >= total,
    };
    let pos = |id| model.components.iter().position(|c| &c.id == id).unwrap();
    let mut state = start.to_vec();
    loop {
        let mut next = state.clone();
        for (c, comp) in model.components.iter().enumerate() {
            let hit = deployed[c].iter().filter(|&&t| vulnerable[t]).count();
            let by_type = threshold(hit, deployed[c].len());
            let by_input = comp.kind != ComponentKind::Sensor
                && !comp.inputs.is_empty()
                && threshold(
                    comp.inputs.iter().filter(|id| state[pos(*id)]).count(),
                    comp.inputs.len(),
                );
            next[c] = state[c] || by_type || by_input;
        }
        if next == state {
            return state;
        }
        state = next;
    }
}

pub fn deployed_lists(design: &Design) -> Vec<Vec<usize>> {
    design
        .deployments()
        .iter()
        .map(|s| s.iter().collect())
        .collect()
}

/// Expected impact by enumerating every subset of *all* catalog types.
pub fn naive_risk(
    model: &SystemModel,
    catalog: &ImplementationCatalog,
    design: &Design,
    attack: AttackModel,
    impact: &dyn Fn(&[bool]) -> f64,
) -> f64 {
    let n = catalog.types.len();
    let deployed = deployed_lists(design);
    let mut total = 0.0;
    for mask in 0u32..1 << n {
        let vulnerable: Vec<bool> = (0..n).map(|t| mask >> t & 1 == 1).collect();
        let mut p = 1.0;
        for (t, &v) in vulnerable.iter().enumerate() {
            let s = catalog.types[t].levels[design.level(t)].secure_prob;
            p *= if v { 1.0 - s } else { s };
        }
        let compromised = naive_propagate(model, &deployed, &vulnerable, attack);
        total += p * impact(&compromised);
    }
    total
}

pub fn count(compromised: &[bool]) -> f64 {
    compromised.iter().filter(|&&b| b).count() as f64
}

/// (R, D, H) spend, hardening above each type's cheapest level.
pub fn naive_costs(catalog: &ImplementationCatalog, design: &Design) -> (Money, Money, Money) {
    let mut r = 0;
    let mut used = vec![false; catalog.types.len()];
    for set in design.deployments() {
        for t in set.iter() {
            r += catalog.types[t].deploy_cost;
            used[t] = true;
        }
    }
    let d = (0..used.len())
        .filter(|&t| used[t])
        .map(|t| catalog.types[t].adoption_cost)
        .sum();
    let h = (0..catalog.types.len())
        .map(|t| {
            let levels = &catalog.types[t].levels;
            levels[design.level(t)].raw_cost - levels[0].raw_cost
        })
        .sum();
    (r, d, h)
}

pub fn naive_feasible(
    catalog: &ImplementationCatalog,
    budgets: &BudgetConfig,
    design: &Design,
) -> bool {
    let (r, d, h) = naive_costs(catalog, design);
    match *budgets {
        BudgetConfig::Split {
            redundancy,
            diversity,
            hardening,
        } => r <= redundancy && d <= diversity && h <= hardening,
        BudgetConfig::Combined(b) => r + d + h <= b,
    }
}

/// Every design of the instance, in no particular order.
pub fn all_designs(instance: &Instance) -> Vec<Design> {
    let mut deployments: Vec<Vec<TypeSet>> = vec![vec![]];
    for c in 0..instance.num_components() {
        let allowed: Vec<usize> = instance.allowed(c).iter().collect();
        let mut next = Vec::new();
        for prefix in &deployments {
            for mask in 0u32..1 << allowed.len() {
                let set: TypeSet = (0..allowed.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| allowed[k])
                    .collect();
                let mut d = prefix.clone();
                d.push(set);
                next.push(d);
            }
        }
        deployments = next;
    }
    let mut levels: Vec<Vec<usize>> = vec![vec![]];
    for t in 0..instance.num_types() {
        levels = levels
            .into_iter()
            .flat_map(|prefix| {
                (0..instance.num_levels(t)).map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l);
                    p
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for d in &deployments {
        for l in &levels {
            out.push(Design::from_parts(d.clone(), l.clone()));
        }
    }
    out
}

/// Minimum risk over all feasible designs, and every design within `tol` of it.
pub fn naive_optimum(
    instance: &Instance,
    budgets: &BudgetConfig,
    attack: AttackModel,
    tol: f64,
) -> (f64, Vec<Design>) {
    let scored: Vec<(f64, Design)> = all_designs(instance)
        .into_iter()
        .filter(|d| naive_feasible(instance.catalog(), budgets, d))
        .map(|d| {
            (
                naive_risk(instance.model(), instance.catalog(), &d, attack, &count),
                d,
            )
        })
        .collect();
    let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let near = scored
        .into_iter()
        .filter(|s| s.0 <= best + tol)
        .map(|s| s.1)
        .collect();
    (best, near)
}

/// Whether some `k` or fewer families cover the universe.
pub fn has_cover(universe: &[String], families: &[Vec<String>], k: usize) -> bool {
    (0u32..1 << families.len())
        .filter(|mask| mask.count_ones() as usize <= k)
        .any(|mask| {
            universe
                .iter()
                .all(|u| (0..families.len()).any(|j| mask >> j & 1 == 1 && families[j].contains(u)))
        })
}

/// Size knobs for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct Tiny {
    pub components: usize,
    pub types: usize,
    pub levels: usize,
    pub max_cost: Money,
}

/// A random valid instance: a few sensors, then other components reading
/// arbitrary earlier or later components (cycles allowed).
pub fn random_instance<R: Rng>(rng: &mut R, size: Tiny) -> Instance {
    let n = rng.gen_range(1..=size.components);
    let t = rng.gen_range(1..=size.types);
    let sensors = rng.gen_range(1..=n);
    let kinds = [
        ComponentKind::Actuator,
        ComponentKind::Processing,
        ComponentKind::Interface,
    ];
    let type_ids: Vec<String> = (0..t).map(|i| format!("t{i}")).collect();
    let components = (0..n)
        .map(|c| {
            let kind = if c < sensors {
                ComponentKind::Sensor
            } else {
                *kinds.choose(rng).unwrap()
            };
            let inputs = if kind == ComponentKind::Sensor {
                vec![]
            } else {
                (0..n)
                    .filter(|&o| o != c && rng.gen_bool(0.5))
                    .map(|o| format!("c{o}").as_str().into())
                    .collect()
            };
            let mut allowed: Vec<_> = type_ids
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .cloned()
                .collect();
            if allowed.is_empty() {
                allowed.push(type_ids.choose(rng).unwrap().clone());
            }
            Component {
                id: format!("c{c}").as_str().into(),
                kind,
                inputs,
                allowed: allowed.iter().map(|s| s.as_str().into()).collect(),
            }
        })
        .collect();
    let types = type_ids
        .iter()
        .map(|id| {
            let levels = rng.gen_range(1..=size.levels);
            let mut s = rng.gen_range(0.0..0.9);
            let mut h = rng.gen_range(0..=size.max_cost);
            let levels = (0..levels)
                .map(|_| {
                    let level = HardeningLevel {
                        secure_prob: s,
                        raw_cost: h,
                    };
                    s += rng.gen_range(0.0..(1.0 - s));
                    h += rng.gen_range(1..=size.max_cost.max(1));
                    level
                })
                .collect();
            ImplementationType {
                id: id.as_str().into(),
                deploy_cost: rng.gen_range(0..=size.max_cost),
                adoption_cost: rng.gen_range(0..=size.max_cost),
                levels,
            }
        })
        .collect();
    Instance::new(SystemModel { components }, ImplementationCatalog { types }).unwrap()
}

/// A random design of `instance` (not necessarily feasible).
pub fn random_design<R: Rng>(rng: &mut R, instance: &Instance) -> Design {
    let deployed = (0..instance.num_components())
        .map(|c| {
            instance
                .allowed(c)
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .collect()
        })
        .collect();
    let levels = (0..instance.num_types())
        .map(|t| rng.gen_range(0..instance.num_levels(t)))
        .collect();
    Design::from_parts(deployed, levels)
}

pub fn random_budgets<R: Rng>(rng: &mut R, max: Money) -> BudgetConfig {
    if rng.gen_bool(0.5) {
        BudgetConfig::Combined(rng.gen_range(0..=3 * max))
    } else {
        BudgetConfig::split(
            rng.gen_range(0..=max),
            rng.gen_range(0..=max),
            rng.gen_range(0..=max),
        )
    }
}
