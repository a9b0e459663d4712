//! Redundancy, diversity and hardening cost functions.
//!
//! Hardening is charged incrementally above each type's cheapest level, so
//! the empty design costs nothing in every category.

use serde::Serialize;

use super::{BudgetConfig, Design, ImplementationCatalog, Money};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub redundancy: Money,
    pub diversity: Money,
    pub hardening: Money,
}

impl CostBreakdown {
    pub fn of(design: &Design, catalog: &ImplementationCatalog) -> Result<Self> {
        Ok(CostBreakdown {
            redundancy: redundancy_cost(design, catalog)?,
            diversity: diversity_cost(design, catalog)?,
            hardening: hardening_cost(design, catalog)?,
        })
    }

    pub fn total(&self) -> Money {
        self.redundancy + self.diversity + self.hardening
    }
}

fn check_types(design: &Design, catalog: &ImplementationCatalog) -> Result<()> {
    let known = catalog.types.len();
    if let Some(ty) = design.deployed_types().iter().find(|&ty| ty >= known) {
        return Err(Error::InvalidDesign(format!(
            "unknown implementation index {ty} (catalog has {known} types)"
        )));
    }
    Ok(())
}

/// Sum of `R_i` over every deployed instance.
pub fn redundancy_cost(design: &Design, catalog: &ImplementationCatalog) -> Result<Money> {
    check_types(design, catalog)?;
    Ok(design
        .deployments()
        .iter()
        .flat_map(|set| set.iter())
        .map(|ty| catalog.types[ty].deploy_cost)
        .sum())
}

/// Sum of `D_i` over adopted types, each counted once.
pub fn diversity_cost(design: &Design, catalog: &ImplementationCatalog) -> Result<Money> {
    check_types(design, catalog)?;
    Ok(design
        .deployed_types()
        .iter()
        .map(|ty| catalog.types[ty].adoption_cost)
        .sum())
}

/// Sum over all catalog types of the chosen level's cost minus the cheapest
/// level's cost.
pub fn hardening_cost(design: &Design, catalog: &ImplementationCatalog) -> Result<Money> {
    if design.levels().len() != catalog.types.len() {
        return Err(Error::InvalidDesign(format!(
            "design has {} levels, catalog has {} types",
            design.levels().len(),
            catalog.types.len()
        )));
    }
    let mut total = 0;
    for (ty, &level) in design.levels().iter().enumerate() {
        let levels = &catalog.types[ty].levels;
        let chosen = levels.get(level).ok_or_else(|| {
            Error::InvalidDesign(format!(
                "level index {level} out of range for `{}`",
                catalog.types[ty].id
            ))
        })?;
        let cheapest = levels.iter().map(|l| l.raw_cost).min().unwrap_or(0);
        total += chosen.raw_cost - cheapest;
    }
    Ok(total)
}

/// Whether the design's spend fits the budget. Designs the cost functions
/// reject are reported infeasible.
pub fn is_feasible(
    design: &Design,
    budgets: &BudgetConfig,
    catalog: &ImplementationCatalog,
) -> bool {
    CostBreakdown::of(design, catalog).is_ok_and(|costs| budgets.admits(&costs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HardeningLevel, ImplementationType, TypeSet};

    /// Five types with the reference cost parameters.
    fn catalog() -> ImplementationCatalog {
        let r = [0, 0, 0, 1, 1];
        let d = [0, 1, 1, 1, 1];
        ImplementationCatalog {
            types: (0..5)
                .map(|i| ImplementationType {
                    id: format!("i{}", i + 1).as_str().into(),
                    deploy_cost: r[i],
                    adoption_cost: d[i],
                    levels: (1..=10u64)
                        .map(|l| HardeningLevel {
                            secure_prob: 1.0 - 0.5f64.powf(0.5 * l as f64 + 1.0),
                            raw_cost: 4 * l * l,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    fn design(deployed: &[&[usize]]) -> Design {
        Design::from_parts(
            deployed
                .iter()
                .map(|d| d.iter().copied().collect::<TypeSet>())
                .collect(),
            vec![0; 5],
        )
    }

    #[test]
    fn empty_design_costs_nothing() {
        let cat = catalog();
        let d = design(&[&[], &[], &[]]);
        assert_eq!(
            CostBreakdown::of(&d, &cat).unwrap(),
            CostBreakdown::default()
        );
        assert!(is_feasible(&d, &BudgetConfig::Combined(0), &cat));
        assert!(is_feasible(&d, &BudgetConfig::split(0, 0, 0), &cat));
    }

    #[test]
    fn redundancy_examples() {
        let cat = catalog();
        assert_eq!(redundancy_cost(&design(&[&[3], &[3]]), &cat).unwrap(), 2);
        assert_eq!(redundancy_cost(&design(&[&[0, 3]]), &cat).unwrap(), 1);
    }

    #[test]
    fn diversity_counts_each_type_once() {
        let cat = catalog();
        assert_eq!(
            diversity_cost(&design(&[&[1usize] as &[usize]; 5]), &cat).unwrap(),
            1
        );
        assert_eq!(diversity_cost(&design(&[&[0], &[0]]), &cat).unwrap(), 0);
        assert_eq!(diversity_cost(&design(&[&[1], &[2, 1]]), &cat).unwrap(), 2);
    }

    #[test]
    fn hardening_is_incremental() {
        let cat = catalog();
        let mut d = design(&[&[]]);
        assert_eq!(hardening_cost(&d, &cat).unwrap(), 0);
        d.set_level(0, 2); // l = 3
        assert_eq!(hardening_cost(&d, &cat).unwrap(), 32);
        d.set_level(0, 9);
        d.set_level(4, 9);
        assert_eq!(hardening_cost(&d, &cat).unwrap(), 792);
    }

    #[test]
    fn invalid_designs_are_errors() {
        let cat = catalog();
        let bad_type = Design::from_parts(vec![TypeSet::from_iter([7])], vec![0; 5]);
        assert!(matches!(
            redundancy_cost(&bad_type, &cat),
            Err(Error::InvalidDesign(_))
        ));
        let mut bad_level = design(&[&[0]]);
        bad_level.set_level(1, 10);
        assert!(matches!(
            hardening_cost(&bad_level, &cat),
            Err(Error::InvalidDesign(_))
        ));
        assert!(!is_feasible(
            &bad_level,
            &BudgetConfig::Combined(1000),
            &cat
        ));
    }

    #[test]
    fn feasibility_examples() {
        let costs = CostBreakdown {
            redundancy: 2,
            diversity: 1,
            hardening: 0,
        };
        assert!(!BudgetConfig::split(1, 5, 5).admits(&costs));
        let costs = CostBreakdown {
            hardening: 3,
            ..costs
        };
        assert!(BudgetConfig::Combined(6).admits(&costs));
        assert!(!BudgetConfig::Combined(5).admits(&costs));
    }
}
