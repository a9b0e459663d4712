//! Design plans: priority orderings that map greedily onto feasible designs.
//!
//! A plan lists every valid (component, type) pair once (`ro`) and every type
//! `|levels| - 1` times (`lo`). Mapping starts from the empty design, adds
//! each pair of `ro` in order when the result stays within budget, then
//! walks `lo` and raises the named type one level whenever that fits.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{BudgetConfig, CostBreakdown, Design, Instance};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DesignPlan {
    /// (component, type) insertion priority.
    pub ro: Vec<(usize, usize)>,
    /// Level-raise priority; type `i` appears `|L_i| - 1` times.
    pub lo: Vec<usize>,
}

impl DesignPlan {
    /// The plan with pairs and raises in index order.
    pub fn canonical(instance: &Instance) -> Self {
        let ro = (0..instance.num_components())
            .flat_map(|c| instance.allowed(c).iter().map(move |ty| (c, ty)))
            .collect();
        let lo = (0..instance.num_types())
            .flat_map(|ty| std::iter::repeat_n(ty, instance.num_levels(ty) - 1))
            .collect();
        DesignPlan { ro, lo }
    }

    /// Checks the multiset invariants against `instance`.
    pub fn is_valid_for(&self, instance: &Instance) -> bool {
        let mut ro = self.ro.clone();
        let mut lo = self.lo.clone();
        ro.sort_unstable();
        lo.sort_unstable();
        let canonical = DesignPlan::canonical(instance);
        ro == canonical.ro && lo == canonical.lo
    }
}

pub fn random_plan<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> DesignPlan {
    let mut plan = DesignPlan::canonical(instance);
    plan.ro.shuffle(rng);
    plan.lo.shuffle(rng);
    plan
}

/// Swaps two random positions of `ro` and two random positions of `lo`.
/// Lists shorter than two entries are left alone.
pub fn perturb<R: Rng + ?Sized>(plan: &DesignPlan, rng: &mut R) -> DesignPlan {
    let mut next = plan.clone();
    swap_two(&mut next.ro, rng);
    swap_two(&mut next.lo, rng);
    next
}

fn swap_two<T, R: Rng + ?Sized>(list: &mut [T], rng: &mut R) {
    if list.len() >= 2 {
        let a = rng.gen_range(0..list.len());
        let b = rng.gen_range(0..list.len());
        list.swap(a, b);
    }
}

/// Greedy plan-to-design map. The result is always feasible under `budgets`.
pub fn map_to_design(plan: &DesignPlan, instance: &Instance, budgets: &BudgetConfig) -> Design {
    let catalog = instance.catalog();
    let mut design = Design::empty(instance);
    let mut costs = CostBreakdown::default();
    let mut instances_of = vec![0usize; instance.num_types()];

    for &(c, ty) in &plan.ro {
        if design.deployed(c).contains(ty) {
            continue;
        }
        let spec = &catalog.types[ty];
        let candidate = CostBreakdown {
            redundancy: costs.redundancy + spec.deploy_cost,
            diversity: costs.diversity
                + if instances_of[ty] == 0 {
                    spec.adoption_cost
                } else {
                    0
                },
            ..costs
        };
        if budgets.admits(&candidate) {
            design.deploy(c, ty);
            instances_of[ty] += 1;
            costs = candidate;
        }
    }

    for &ty in &plan.lo {
        let levels = &catalog.types[ty].levels;
        let current = design.level(ty);
        // Costs strictly increase along the list, so the next index is the
        // cheapest strictly more expensive level.
        let Some(next) = levels.get(current + 1) else {
            continue;
        };
        let candidate = CostBreakdown {
            hardening: costs.hardening + (next.raw_cost - levels[current].raw_cost),
            ..costs
        };
        if budgets.admits(&candidate) {
            design.set_level(ty, current + 1);
            costs = candidate;
        }
    }

    design
}
