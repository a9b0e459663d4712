mod common;

use std::collections::HashSet;

use common::*;
use iiot_design::generator::InstanceFile;
use iiot_design::model::{
    BudgetConfig, CostBreakdown, Design, Instance, NamedDesign, SystemModel, TypeSet,
};
use iiot_design::optimizer::{acceptance_probability, AcceptanceRule};
use iiot_design::plan::{map_to_design, random_plan, DesignPlan};
use iiot_design::propagation::{propagate, propagate_from, AttackModel};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SMALL: Tiny = Tiny {
    components: 5,
    types: 4,
    levels: 4,
    max_cost: 4,
};

fn vulnerable_set(rng: &mut ChaCha8Rng, n: usize) -> TypeSet {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

/// Extensions of `design` by one deployment or one level raise.
fn single_extensions(instance: &Instance, design: &Design) -> Vec<Design> {
    let mut out = Vec::new();
    for c in 0..instance.num_components() {
        for ty in instance.allowed(c).iter() {
            if !design.deployed(c).contains(ty) {
                let mut d = design.clone();
                d.deploy(c, ty);
                out.push(d);
            }
        }
    }
    for ty in 0..instance.num_types() {
        if design.level(ty) + 1 < instance.num_levels(ty) {
            let mut d = design.clone();
            d.set_level(ty, design.level(ty) + 1);
            out.push(d);
        }
    }
    out
}

fn permutations<T: Clone + Ord>(items: &[T]) -> Vec<Vec<T>> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out = vec![sorted.clone()];
    // Lexicographic next-permutation; duplicates are produced once.
    loop {
        let Some(i) = (0..sorted.len().saturating_sub(1))
            .rev()
            .find(|&i| sorted[i] < sorted[i + 1])
        else {
            return out;
        };
        let j = (i + 1..sorted.len())
            .rev()
            .find(|&j| sorted[j] > sorted[i])
            .unwrap();
        sorted.swap(i, j);
        sorted[i + 1..].reverse();
        out.push(sorted.clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn costs_match_reference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, SMALL);
        let design = random_design(&mut rng, &inst);
        let costs = CostBreakdown::of(&design, inst.catalog()).unwrap();
        prop_assert_eq!((costs.redundancy, costs.diversity, costs.hardening), naive_costs(inst.catalog(), &design));
        prop_assert_eq!(CostBreakdown::of(&Design::empty(&inst), inst.catalog()).unwrap().total(), 0);
    }

    #[test]
    fn mapped_designs_are_feasible_and_greedy_maximal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, SMALL);
        let budgets = random_budgets(&mut rng, 8);
        let plan = random_plan(&inst, &mut rng);
        let design = map_to_design(&plan, &inst, &budgets);
        prop_assert!(naive_feasible(inst.catalog(), &budgets, &design));
        prop_assert_eq!(&map_to_design(&plan, &inst, &budgets), &design);
        // Every skipped entry still fails against the final design's costs.
        for &(c, ty) in &plan.ro {
            if !design.deployed(c).contains(ty) {
                let mut d = design.clone();
                d.deploy(c, ty);
                prop_assert!(!naive_feasible(inst.catalog(), &budgets, &d));
            }
        }
        for ty in 0..inst.num_types() {
            if design.level(ty) + 1 < inst.num_levels(ty) {
                let mut d = design.clone();
                d.set_level(ty, design.level(ty) + 1);
                prop_assert!(!naive_feasible(inst.catalog(), &budgets, &d));
            }
        }
    }

    #[test]
    fn propagation_laws(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, Tiny { components: 7, types: 5, levels: 1, max_cost: 1 });
        let design = random_design(&mut rng, &inst);
        let small = vulnerable_set(&mut rng, inst.num_types());
        let large = small.union(vulnerable_set(&mut rng, inst.num_types()));
        for attack in [AttackModel::Stealthy, AttackModel::NonStealthy] {
            let c = propagate(&inst, &design, small, attack);
            prop_assert_eq!(&propagate_from(&inst, &design, small, attack, &c), &c);
            prop_assert!(c.is_subset(&propagate(&inst, &design, large, attack)));
        }
        let st = propagate(&inst, &design, small, AttackModel::Stealthy);
        prop_assert!(st.is_subset(&propagate(&inst, &design, small, AttackModel::NonStealthy)));
    }

    #[test]
    fn propagation_ignores_component_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, Tiny { components: 7, types: 4, levels: 1, max_cost: 1 });
        let design = random_design(&mut rng, &inst);
        let vulnerable = vulnerable_set(&mut rng, inst.num_types());
        let mut order: Vec<usize> = (0..inst.num_components()).collect();
        order.shuffle(&mut rng);
        let shuffled = Instance::new(
            SystemModel { components: order.iter().map(|&c| inst.component(c).clone()).collect() },
            inst.catalog().clone(),
        ).unwrap();
        let moved = Design::from_parts(order.iter().map(|&c| design.deployed(c)).collect(), design.levels().to_vec());
        for attack in [AttackModel::Stealthy, AttackModel::NonStealthy] {
            let a = propagate(&inst, &design, vulnerable, attack).ids(&inst);
            let b = propagate(&shuffled, &moved, vulnerable, attack).ids(&shuffled);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn named_design_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, SMALL);
        let design = random_design(&mut rng, &inst);
        let text = serde_json::to_string(&design.to_named(&inst)).unwrap();
        let named: NamedDesign = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(Design::from_named(&named, &inst).unwrap(), design);
    }

    #[test]
    fn instance_file_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, SMALL);
        let file = InstanceFile {
            components: inst.model().clone(),
            catalog: inst.catalog().clone(),
            budgets: Some(random_budgets(&mut rng, 10)),
            attack: None,
        };
        let back: InstanceFile = serde_json::from_str(&file.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, file);
    }

    #[test]
    fn acceptance_is_monotone(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, k1 in 1usize..500, k2 in 1usize..500) {
        let params = iiot_design::optimizer::AnnealingParams::new(500, 2.0);
        let (lo_d, hi_d) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (lo_k, hi_k) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let t = params.temperature(lo_k);
        let p = |d, t| acceptance_probability(d, t, AcceptanceRule::Standard);
        prop_assert!(p(hi_d, t) <= p(lo_d, t));
        prop_assert!(p(lo_d, params.temperature(hi_k)) <= p(lo_d, t));
        prop_assert_eq!(p(-d1 - 1e-9, t), 1.0);
    }
}

/// Every design that no single addition or raise keeps feasible is the
/// image of some plan, under split budgets.
#[test]
fn split_budgets_reach_every_maximal_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let size = Tiny {
        components: 2,
        types: 3,
        levels: 3,
        max_cost: 3,
    };
    let mut checked = 0;
    while checked < 40 {
        let inst = random_instance(&mut rng, size);
        let canonical = DesignPlan::canonical(&inst);
        if canonical.ro.len() > 5 || canonical.lo.len() > 4 {
            continue;
        }
        let budgets = BudgetConfig::split(
            rng.gen_range(0..6),
            rng.gen_range(0..6),
            rng.gen_range(0..8),
        );
        let image: HashSet<Design> = permutations(&canonical.ro)
            .into_iter()
            .flat_map(|ro| {
                permutations(&canonical.lo)
                    .into_iter()
                    .map(move |lo| DesignPlan { ro: ro.clone(), lo })
            })
            .map(|plan| map_to_design(&plan, &inst, &budgets))
            .collect();
        let feasible = |d: &Design| naive_feasible(inst.catalog(), &budgets, d);
        for design in all_designs(&inst).iter().filter(|d| feasible(d)) {
            if single_extensions(&inst, design)
                .iter()
                .all(|e| !feasible(e))
            {
                assert!(
                    image.contains(design),
                    "unreachable maximal design {design:?}"
                );
            }
        }
        checked += 1;
    }
}

/// Under a combined budget the ro pass spends before any raise, so a
/// maximal design that trades a deployment for hardening is out of reach.
#[test]
fn combined_budget_can_miss_a_maximal_design() {
    use iiot_design::model::{
        Component, ComponentKind, HardeningLevel, ImplementationCatalog, ImplementationType,
    };
    let ty = |id: &str, r, levels: &[u64]| ImplementationType {
        id: id.into(),
        deploy_cost: r,
        adoption_cost: 0,
        levels: levels
            .iter()
            .map(|&h| HardeningLevel {
                secure_prob: 0.5,
                raw_cost: h,
            })
            .collect(),
    };
    let inst = Instance::new(
        SystemModel {
            components: vec![Component {
                id: "c".into(),
                kind: ComponentKind::Sensor,
                inputs: vec![],
                allowed: vec!["i1".into(), "i2".into()],
            }],
        },
        ImplementationCatalog {
            types: vec![ty("i1", 0, &[0, 1]), ty("i2", 1, &[0])],
        },
    )
    .unwrap();
    let budgets = BudgetConfig::Combined(1);
    // {i1} hardened once: maximal, since adding i2 would cost 2.
    let target = Design::from_parts(vec![TypeSet::from_iter([0])], vec![1, 0]);
    let canonical = DesignPlan::canonical(&inst);
    let reached: HashSet<Design> = permutations(&canonical.ro)
        .into_iter()
        .map(|ro| {
            map_to_design(
                &DesignPlan {
                    ro,
                    lo: canonical.lo.clone(),
                },
                &inst,
                &budgets,
            )
        })
        .collect();
    assert!(!reached.contains(&target));
    assert!(single_extensions(&inst, &target)
        .iter()
        .all(|d| !naive_feasible(inst.catalog(), &budgets, d)));
}
