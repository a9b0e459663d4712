//! Simulated annealing over design plans, and an exhaustive oracle.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::impact::ImpactEvaluator;
use crate::model::{BudgetConfig, CostBreakdown, Design, Instance, TypeSet};
use crate::plan::{map_to_design, perturb, random_plan};
use crate::propagation::AttackModel;
use crate::risk::{
    evaluate_risk, risk_exact, sample_stream, RiskMethod, DEFAULT_ENUMERATION_LIMIT,
};

/// Everything needed to score a design.
pub struct Problem<'a, I: ?Sized> {
    pub instance: &'a Instance,
    pub budgets: BudgetConfig,
    pub attack: AttackModel,
    pub impact: &'a I,
    pub risk: RiskMethod,
}

impl<'a, I: ImpactEvaluator + ?Sized> Problem<'a, I> {
    pub fn new(
        instance: &'a Instance,
        budgets: BudgetConfig,
        attack: AttackModel,
        impact: &'a I,
    ) -> Self {
        Problem {
            instance,
            budgets,
            attack,
            impact,
            risk: RiskMethod::default(),
        }
    }

    pub fn with_risk_method(mut self, risk: RiskMethod) -> Self {
        self.risk = risk;
        self
    }

    pub fn with_budgets(&self, budgets: BudgetConfig) -> Problem<'a, I> {
        Problem {
            instance: self.instance,
            budgets,
            attack: self.attack,
            impact: self.impact,
            risk: self.risk,
        }
    }

    pub fn risk_of(&self, design: &Design) -> Result<f64> {
        evaluate_risk(self.instance, design, self.attack, self.impact, self.risk).map(|r| r.mean)
    }
}

/// How a worsening neighbor is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcceptanceRule {
    /// `exp(-(ρ' - ρ) / T)`.
    #[default]
    Standard,
    /// `exp((ρ' - ρ) / T)`, which accepts every worsening move. Kept only to
    /// reproduce the rule as originally printed.
    AsPrinted,
}

pub fn acceptance_probability(delta: f64, temperature: f64, rule: AcceptanceRule) -> f64 {
    let exponent = match rule {
        AcceptanceRule::Standard => -delta / temperature,
        AcceptanceRule::AsPrinted => delta / temperature,
    };
    exponent.exp().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingParams {
    pub k_max: usize,
    pub t0: f64,
    pub beta: f64,
    pub restarts: usize,
    pub rule: AcceptanceRule,
}

impl AnnealingParams {
    /// Cooling rate that brings the temperature to 1% of `t0` at `k_max`.
    pub fn default_beta(k_max: usize) -> f64 {
        100f64.ln() / k_max.max(1) as f64
    }

    pub fn new(k_max: usize, t0: f64) -> Self {
        AnnealingParams {
            k_max,
            t0,
            beta: Self::default_beta(k_max),
            restarts: 3,
            rule: AcceptanceRule::Standard,
        }
    }

    pub fn temperature(&self, k: usize) -> f64 {
        self.t0 * (-self.beta * k as f64).exp()
    }

    fn check(&self) -> Result<()> {
        if self.k_max == 0 || self.restarts == 0 {
            return Err(Error::Domain(
                "k_max and restarts must be at least 1".into(),
            ));
        }
        if self.t0.is_nan() || self.t0 <= 0.0 || self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::Domain("T0 and beta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub restart: usize,
    /// 0 is the initial random plan.
    pub iteration: usize,
    pub current: f64,
    /// Best risk seen so far across the whole run.
    pub best: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_design: Design,
    pub best_risk: f64,
    pub best_restart: usize,
    /// Restarts back to back, each with iterations `0..=k_max`.
    pub trace: Vec<TraceEntry>,
    pub iterations_per_second: f64,
}

impl OptimizationResult {
    /// Entries of one restart, iterations `1..=k_max`.
    pub fn iterations_of(&self, restart: usize) -> impl Iterator<Item = &TraceEntry> {
        self.trace
            .iter()
            .filter(move |e| e.restart == restart && e.iteration > 0)
    }
}

struct Chain {
    best_design: Design,
    best_risk: f64,
    /// (current, per-chain best) for iterations 0..=k_max.
    trace: Vec<(f64, f64)>,
}

fn anneal_once<I: ImpactEvaluator + ?Sized>(
    problem: &Problem<'_, I>,
    params: &AnnealingParams,
    seed: u64,
    restart: usize,
) -> Result<Chain> {
    let mut rng = sample_stream(seed, restart as u64);
    let mut memo: HashMap<Design, f64> = HashMap::new();
    let mut score = |design: &Design| -> Result<f64> {
        if let Some(&r) = memo.get(design) {
            return Ok(r);
        }
        let r = problem.risk_of(design)?;
        memo.insert(design.clone(), r);
        Ok(r)
    };

    let mut plan = random_plan(problem.instance, &mut rng);
    let mut design = map_to_design(&plan, problem.instance, &problem.budgets);
    let mut risk = score(&design)?;
    let mut best_design = design.clone();
    let mut best_risk = risk;
    let mut trace = Vec::with_capacity(params.k_max + 1);
    trace.push((risk, best_risk));

    for k in 1..=params.k_max {
        let candidate = perturb(&plan, &mut rng);
        let candidate_design = map_to_design(&candidate, problem.instance, &problem.budgets);
        let candidate_risk = score(&candidate_design)?;
        let temperature = params.temperature(k);
        let accept = candidate_risk < risk
            || rng.gen::<f64>()
                <= acceptance_probability(candidate_risk - risk, temperature, params.rule);
        if accept {
            plan = candidate;
            design = candidate_design;
            risk = candidate_risk;
            if risk < best_risk {
                best_risk = risk;
                best_design = design.clone();
            }
        }
        trace.push((risk, best_risk));
    }

    Ok(Chain {
        best_design,
        best_risk,
        trace,
    })
}

/// Runs `params.restarts` independent chains (in parallel) and keeps the
/// best design. Identical seeds give identical results.
pub fn simulated_annealing<I: ImpactEvaluator + ?Sized>(
    problem: &Problem<'_, I>,
    params: &AnnealingParams,
    seed: u64,
) -> Result<OptimizationResult> {
    params.check()?;
    let started = Instant::now();
    let chains: Vec<Chain> = (0..params.restarts)
        .into_par_iter()
        .map(|restart| anneal_once(problem, params, seed, restart))
        .collect::<Result<_>>()?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut best_restart = 0;
    for (idx, chain) in chains.iter().enumerate() {
        if chain.best_risk < chains[best_restart].best_risk {
            best_restart = idx;
        }
    }

    let mut trace = Vec::with_capacity(chains.len() * (params.k_max + 1));
    let mut running = f64::INFINITY;
    for (restart, chain) in chains.iter().enumerate() {
        for (iteration, &(current, _)) in chain.trace.iter().enumerate() {
            running = running.min(current);
            trace.push(TraceEntry {
                restart,
                iteration,
                current,
                best: running,
            });
        }
    }

    let iterations = (params.k_max * params.restarts) as f64;
    let winner = &chains[best_restart];
    Ok(OptimizationResult {
        best_design: winner.best_design.clone(),
        best_risk: winner.best_risk,
        best_restart,
        trace,
        iterations_per_second: if elapsed > 0.0 {
            iterations / elapsed
        } else {
            f64::INFINITY
        },
    })
}

/// Size caps for [`brute_force_design`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceLimits {
    /// Cap on `Π_c 2^|I_c| · Π_i |L_i|`.
    pub max_designs: u128,
    pub enumeration_limit: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_designs: 1_000_000,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

/// Number of (deployment, level) combinations of an instance.
pub fn design_space_size(instance: &Instance) -> u128 {
    let mut size: u128 = 1;
    for c in 0..instance.num_components() {
        size = size.saturating_mul(1u128 << instance.allowed(c).len().min(127));
    }
    for ty in 0..instance.num_types() {
        size = size.saturating_mul(instance.num_levels(ty) as u128);
    }
    size
}

struct Exhaustive<'p, 'a, I: ?Sized> {
    problem: &'p Problem<'a, I>,
    limit: usize,
    design: Design,
    best: Option<(Design, f64)>,
}

impl<I: ImpactEvaluator + ?Sized> Exhaustive<'_, '_, I> {
    /// Returns `Ok(true)` once a zero-risk design is found; nothing can beat
    /// it and nothing later in the enumeration order wins the tie.
    fn deployments(
        &mut self,
        c: usize,
        costs: CostBreakdown,
        counts: &mut [usize],
    ) -> Result<bool> {
        let instance = self.problem.instance;
        if c == instance.num_components() {
            return self.levels(0, costs);
        }
        let allowed = instance.allowed(c).bits();
        let mut sub: u64 = 0;
        loop {
            let set = TypeSet::from_bits(sub);
            let mut next = costs;
            for ty in set.iter() {
                let spec = instance.implementation(ty);
                next.redundancy += spec.deploy_cost;
                if counts[ty] == 0 {
                    next.diversity += spec.adoption_cost;
                }
                counts[ty] += 1;
            }
            // Partial deployment costs only grow, so an over-budget prefix
            // has no feasible completion.
            let stop = if self.problem.budgets.admits(&next) {
                for ty in set.iter() {
                    self.design.deploy(c, ty);
                }
                let stop = self.deployments(c + 1, next, counts)?;
                for ty in set.iter() {
                    self.design.undeploy(c, ty);
                }
                stop
            } else {
                false
            };
            for ty in set.iter() {
                counts[ty] -= 1;
            }
            if stop {
                return Ok(true);
            }
            if sub == allowed {
                return Ok(false);
            }
            sub = ((sub | !allowed).wrapping_add(1)) & allowed;
        }
    }

    fn levels(&mut self, ty: usize, costs: CostBreakdown) -> Result<bool> {
        let instance = self.problem.instance;
        if ty == instance.num_types() {
            return self.score();
        }
        // Levels of undeployed types cannot change the risk; the cheapest
        // level is also the lexicographically smallest choice.
        let top = if self.design.deployed_types().contains(ty) {
            instance.num_levels(ty)
        } else {
            1
        };
        let levels = &instance.implementation(ty).levels;
        for level in 0..top {
            let next = CostBreakdown {
                hardening: costs.hardening + (levels[level].raw_cost - levels[0].raw_cost),
                ..costs
            };
            if !self.problem.budgets.admits(&next) {
                break;
            }
            self.design.set_level(ty, level);
            let stop = self.levels(ty + 1, next)?;
            self.design.set_level(ty, 0);
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn score(&mut self) -> Result<bool> {
        let problem = self.problem;
        let risk = risk_exact(
            problem.instance,
            &self.design,
            problem.attack,
            problem.impact,
            self.limit,
        )?
        .mean;
        if self.best.as_ref().is_none_or(|(_, b)| risk < *b) {
            self.best = Some((self.design.clone(), risk));
        }
        Ok(risk == 0.0)
    }
}

/// Exact optimum by enumeration of every feasible design. Ties go to the
/// lexicographically smallest design. Risk is always computed exactly;
/// `problem.risk` is ignored.
pub fn brute_force_design<I: ImpactEvaluator + ?Sized>(
    problem: &Problem<'_, I>,
    limits: BruteForceLimits,
) -> Result<(Design, f64)> {
    let size = design_space_size(problem.instance);
    if size > limits.max_designs {
        return Err(Error::Capacity {
            what: "designs for exhaustive search",
            size,
            limit: limits.max_designs,
        });
    }
    let mut search = Exhaustive {
        problem,
        limit: limits.enumeration_limit,
        design: Design::empty(problem.instance),
        best: None,
    };
    let mut counts = vec![0; problem.instance.num_types()];
    search.deployments(0, CostBreakdown::default(), &mut counts)?;
    // The empty design is always feasible, so something was scored.
    Ok(search.best.expect("empty design is feasible"))
}
