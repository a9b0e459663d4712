//! Budget sweeps and convergence traces, written as CSV.
//!
//! Sweep CSV: `budget,risk,redundancy,diversity,hardening`, one row per
//! budget in ascending order; the last three columns are the spend of the
//! best design found. Convergence CSV: `iteration,current,best` for
//! iterations `1..=k_max` of a single annealing chain.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::impact::ImpactEvaluator;
use crate::model::{BudgetConfig, CostBreakdown, Design, Instance, Money};
use crate::optimizer::{simulated_annealing, AnnealingParams, Problem};
use crate::propagation::AttackModel;
use crate::risk::RiskMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum SweepMode {
    RedundancyOnly,
    DiversityOnly,
    HardeningOnly,
    Combination,
}

impl SweepMode {
    pub const ALL: [SweepMode; 4] = [
        SweepMode::RedundancyOnly,
        SweepMode::DiversityOnly,
        SweepMode::HardeningOnly,
        SweepMode::Combination,
    ];

    /// Single-category modes put `b` on that category and 0 elsewhere.
    pub fn budgets(self, b: Money) -> BudgetConfig {
        match self {
            SweepMode::RedundancyOnly => BudgetConfig::split(b, 0, 0),
            SweepMode::DiversityOnly => BudgetConfig::split(0, b, 0),
            SweepMode::HardeningOnly => BudgetConfig::split(0, 0, b),
            SweepMode::Combination => BudgetConfig::Combined(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Ascending.
    pub budgets: Vec<Money>,
    pub mode: SweepMode,
    pub k_max: usize,
    /// `None` picks [`default_t0`].
    pub t0: Option<f64>,
    /// `None` picks the default cooling rate for `k_max`.
    pub beta: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    pub attack: AttackModel,
    pub risk: RiskMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub budget: Money,
    pub risk: f64,
    pub redundancy: Money,
    pub diversity: Money,
    pub hardening: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub current: f64,
    pub best: f64,
}

/// 10% of the risk of the empty design, or 1 when that risk is zero.
pub fn default_t0<I: ImpactEvaluator + ?Sized>(problem: &Problem<'_, I>) -> Result<f64> {
    let empty = problem.risk_of(&Design::empty(problem.instance))?;
    Ok(if empty > 0.0 { 0.1 * empty } else { 1.0 })
}

pub fn annealing_params<I: ImpactEvaluator + ?Sized>(
    problem: &Problem<'_, I>,
    k_max: usize,
    t0: Option<f64>,
    beta: Option<f64>,
    restarts: usize,
) -> Result<AnnealingParams> {
    let mut params = AnnealingParams::new(k_max, 1.0);
    params.t0 = match t0 {
        Some(t0) => t0,
        None => default_t0(problem)?,
    };
    if let Some(beta) = beta {
        params.beta = beta;
    }
    params.restarts = restarts;
    Ok(params)
}

pub fn run_sweep<I: ImpactEvaluator + ?Sized>(
    instance: &Instance,
    impact: &I,
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if config.budgets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("sweep budgets must be ascending".into()));
    }
    let base = Problem::new(instance, BudgetConfig::Combined(0), config.attack, impact)
        .with_risk_method(config.risk);
    let params = annealing_params(&base, config.k_max, config.t0, config.beta, config.restarts)?;

    config
        .budgets
        .par_iter()
        .map(|&budget| {
            let problem = base.with_budgets(config.mode.budgets(budget));
            let result = simulated_annealing(&problem, &params, config.seed)?;
            let spend = CostBreakdown::of(&result.best_design, instance.catalog())?;
            Ok(SweepRow {
                budget,
                risk: result.best_risk,
                redundancy: spend.redundancy,
                diversity: spend.diversity,
                hardening: spend.hardening,
            })
        })
        .collect()
}

/// Trace of one annealing chain; `params.restarts` is ignored.
pub fn run_convergence<I: ImpactEvaluator + ?Sized>(
    problem: &Problem<'_, I>,
    params: &AnnealingParams,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let single = AnnealingParams {
        restarts: 1,
        ..*params
    };
    let result = simulated_annealing(problem, &single, seed)?;
    Ok(result
        .iterations_of(0)
        .map(|e| ConvergenceRow {
            iteration: e.iteration,
            current: e.current,
            best: e.best,
        })
        .collect())
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}
