//! Expected impact over the zero-day outcome distribution.
//!
//! The exact engine enumerates every subset of the *deployed* types; types
//! deployed nowhere cannot change the compromised set, so their factors
//! marginalize out. The Monte Carlo engine draws sample `k` from its own
//! ChaCha stream `k` under the root seed, which makes the estimate
//! independent of how samples are spread over threads.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::impact::ImpactEvaluator;
use crate::model::{Design, Instance, TypeSet};
use crate::propagation::{propagate, sample_vulnerable, AttackModel, CompromisedSet};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

const MC_BLOCK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Zero for exact estimates.
    pub std_error: f64,
    /// Zero for exact estimates.
    pub samples: usize,
    pub method: EstimateMethod,
}

/// How risk is computed for a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskMethod {
    Exact {
        limit: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    /// Exact when at most `limit` types are deployed, sampled otherwise.
    Auto {
        limit: usize,
        samples: usize,
        seed: u64,
    },
}

impl Default for RiskMethod {
    fn default() -> Self {
        RiskMethod::Auto {
            limit: DEFAULT_ENUMERATION_LIMIT,
            samples: 10_000,
            seed: 0,
        }
    }
}

/// Impact lookups memoized by compromised set.
struct ImpactCache<'a, I: ?Sized> {
    impact: &'a I,
    seen: HashMap<CompromisedSet, f64>,
}

impl<'a, I: ImpactEvaluator + ?Sized> ImpactCache<'a, I> {
    fn new(impact: &'a I) -> Self {
        ImpactCache {
            impact,
            seen: HashMap::new(),
        }
    }

    fn get(&mut self, compromised: CompromisedSet) -> Result<f64> {
        if let Some(&v) = self.seen.get(&compromised) {
            return Ok(v);
        }
        let v = self.impact.impact(&compromised)?;
        self.seen.insert(compromised, v);
        Ok(v)
    }
}

pub fn risk_exact<I: ImpactEvaluator + ?Sized>(
    instance: &Instance,
    design: &Design,
    attack: AttackModel,
    impact: &I,
    limit: usize,
) -> Result<RiskEstimate> {
    design.check(instance)?;
    let deployed: Vec<usize> = design.deployed_types().iter().collect();
    if deployed.len() > limit {
        return Err(Error::Capacity {
            what: "deployed implementation types for exact enumeration (use Monte Carlo)",
            size: deployed.len() as u128,
            limit: limit as u128,
        });
    }
    let secure: Vec<f64> = deployed
        .iter()
        .map(|&ty| instance.secure_prob(ty, design.level(ty)))
        .collect();

    let mut cache = ImpactCache::new(impact);
    let mut total = 0.0;
    for outcome in 0u64..1 << deployed.len() {
        let mut prob = 1.0;
        let mut vulnerable = TypeSet::EMPTY;
        for (k, (&ty, &s)) in deployed.iter().zip(&secure).enumerate() {
            if outcome >> k & 1 == 1 {
                prob *= 1.0 - s;
                vulnerable.insert(ty);
            } else {
                prob *= s;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let compromised = propagate(instance, design, vulnerable, attack);
        total += prob * cache.get(compromised)?;
    }

    Ok(RiskEstimate {
        mean: total,
        std_error: 0.0,
        samples: 0,
        method: EstimateMethod::Exact,
    })
}

/// Stream `index` under `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn risk_monte_carlo<I: ImpactEvaluator + ?Sized>(
    instance: &Instance,
    design: &Design,
    attack: AttackModel,
    impact: &I,
    samples: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if samples == 0 {
        return Err(Error::Domain(
            "Monte Carlo needs at least one sample".into(),
        ));
    }
    design.check(instance)?;

    let blocks: Vec<Vec<f64>> = (0..samples.div_ceil(MC_BLOCK))
        .into_par_iter()
        .map(|block| {
            let mut cache = ImpactCache::new(impact);
            let start = block * MC_BLOCK;
            let end = (start + MC_BLOCK).min(samples);
            (start..end)
                .map(|k| {
                    let mut rng = sample_stream(seed, k as u64);
                    let vulnerable = sample_vulnerable(instance, design, &mut rng);
                    cache.get(propagate(instance, design, vulnerable, attack))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let values = blocks.iter().flatten();
    let n = samples as f64;
    let mean = values.clone().sum::<f64>() / n;
    let std_error = if samples > 1 {
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };

    Ok(RiskEstimate {
        mean,
        std_error,
        samples,
        method: EstimateMethod::MonteCarlo,
    })
}

pub fn evaluate_risk<I: ImpactEvaluator + ?Sized>(
    instance: &Instance,
    design: &Design,
    attack: AttackModel,
    impact: &I,
    method: RiskMethod,
) -> Result<RiskEstimate> {
    match method {
        RiskMethod::Exact { limit } => risk_exact(instance, design, attack, impact, limit),
        RiskMethod::MonteCarlo { samples, seed } => {
            risk_monte_carlo(instance, design, attack, impact, samples, seed)
        }
        RiskMethod::Auto {
            limit,
            samples,
            seed,
        } => {
            if design.deployed_types().len() <= limit {
                risk_exact(instance, design, attack, impact, limit)
            } else {
                risk_monte_carlo(instance, design, attack, impact, samples, seed)
            }
        }
    }
}
