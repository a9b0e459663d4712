//! Synthetic water-utility instances and the instance file format.
//!
//! Cyber layer: sensors feed processing units which feed operator
//! interfaces. Hydraulic layer: a random DAG of junctions with diurnal
//! demand, sensors placed on distinct junctions.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BudgetConfig, Component, ComponentId, ComponentKind, HardeningLevel, ImplementationCatalog,
    ImplementationId, ImplementationType, Instance, Money, SystemModel,
};
use crate::propagation::AttackModel;
use crate::water::{HydraulicNode, Pipe, WaterScenario, HOURS};

pub const CATALOG_LEVELS: usize = 10;
const DEPLOY_COSTS: [Money; 5] = [0, 0, 0, 1, 1];
const ADOPTION_COSTS: [Money; 5] = [0, 1, 1, 1, 1];

/// Secure probability of level `l` (1-based).
pub fn level_secure_prob(l: usize) -> f64 {
    1.0 - 0.5f64.powf(0.5 * l as f64 + 1.0)
}

/// Raw hardening cost of level `l` (1-based).
pub fn level_raw_cost(l: usize) -> Money {
    4 * (l * l) as Money
}

/// Five types `i1..i5`, ten levels each.
pub fn reference_catalog() -> ImplementationCatalog {
    let types = (0..5)
        .map(|t| ImplementationType {
            id: format!("i{}", t + 1).as_str().into(),
            deploy_cost: DEPLOY_COSTS[t],
            adoption_cost: ADOPTION_COSTS[t],
            levels: (1..=CATALOG_LEVELS)
                .map(|l| HardeningLevel {
                    secure_prob: level_secure_prob(l),
                    raw_cost: level_raw_cost(l),
                })
                .collect(),
        })
        .collect();
    ImplementationCatalog { types }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub sensors: usize,
    pub processing: usize,
    pub interfaces: usize,
    /// Sensors read by each processing unit.
    pub fan_in: usize,
    pub hydraulic_nodes: usize,
    /// Probability of an extra pipe between two junctions.
    pub pipe_density: f64,
    pub injections: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Parameters of the bundled reference instance.
    pub fn reference() -> Self {
        GeneratorSpec {
            sensors: 8,
            processing: 4,
            interfaces: 2,
            fan_in: 3,
            hydraulic_nodes: 24,
            pipe_density: 0.1,
            injections: 6,
            seed: 2021,
        }
    }

    fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("sensors", self.sensors),
            ("processing", self.processing),
            ("interfaces", self.interfaces),
            ("fan_in", self.fan_in),
            ("hydraulic_nodes", self.hydraulic_nodes),
            ("injections", self.injections),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be at least 1"));
            }
        }
        if self.fan_in > self.sensors {
            problems.push(format!(
                "fan_in {} exceeds sensor count {}",
                self.fan_in, self.sensors
            ));
        }
        if self.sensors > self.hydraulic_nodes {
            problems.push("more sensors than hydraulic nodes".into());
        }
        if self.injections > self.hydraulic_nodes {
            problems.push("more injection candidates than hydraulic nodes".into());
        }
        if !(0.0..=1.0).contains(&self.pipe_density) {
            problems.push(format!("pipe density {} outside [0, 1]", self.pipe_density));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid generator spec: {}",
                problems.join("; ")
            )))
        }
    }
}

pub fn generate_instance(
    spec: &GeneratorSpec,
) -> Result<(SystemModel, ImplementationCatalog, WaterScenario)> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let catalog = reference_catalog();
    let type_ids: Vec<ImplementationId> = catalog.types.iter().map(|t| t.id.clone()).collect();

    // i1 is always allowed so every component has a free option.
    let allowed = |rng: &mut ChaCha8Rng| -> Vec<ImplementationId> {
        let mut ids = vec![type_ids[0].clone()];
        let extra = rng.gen_range(1..type_ids.len());
        let mut others: Vec<_> = type_ids[1..].to_vec();
        others.shuffle(rng);
        ids.extend(others.into_iter().take(extra));
        ids.sort();
        ids
    };

    let sensor_id = |i: usize| -> ComponentId { format!("s{i}").as_str().into() };
    let proc_id = |i: usize| -> ComponentId { format!("p{i}").as_str().into() };
    let mut components = Vec::new();
    for i in 0..spec.sensors {
        components.push(Component {
            id: sensor_id(i),
            kind: ComponentKind::Sensor,
            inputs: vec![],
            allowed: allowed(&mut rng),
        });
    }
    // Sensor i feeds processing unit i mod P, the rest of the fan-in is random.
    let mut feeds: Vec<Vec<usize>> = vec![Vec::new(); spec.processing];
    for s in 0..spec.sensors {
        feeds[s % spec.processing].push(s);
    }
    for inputs in &mut feeds {
        while inputs.len() < spec.fan_in {
            let s = rng.gen_range(0..spec.sensors);
            if !inputs.contains(&s) {
                inputs.push(s);
            }
        }
        inputs.sort_unstable();
    }
    for (p, inputs) in feeds.iter().enumerate() {
        components.push(Component {
            id: proc_id(p),
            kind: ComponentKind::Processing,
            inputs: inputs.iter().map(|&s| sensor_id(s)).collect(),
            allowed: allowed(&mut rng),
        });
    }
    for h in 0..spec.interfaces {
        let mut inputs: Vec<usize> = (0..spec.processing)
            .filter(|p| p % spec.interfaces == h)
            .collect();
        for p in 0..spec.processing {
            if !inputs.contains(&p) && rng.gen_bool(0.5) {
                inputs.push(p);
            }
        }
        if inputs.is_empty() {
            inputs.push(rng.gen_range(0..spec.processing));
        }
        inputs.sort_unstable();
        components.push(Component {
            id: format!("h{h}").as_str().into(),
            kind: ComponentKind::Interface,
            inputs: inputs.iter().map(|&p| proc_id(p)).collect(),
            allowed: allowed(&mut rng),
        });
    }

    let scenario = generate_scenario(spec, &mut rng);
    Ok((SystemModel { components }, catalog, scenario))
}

fn generate_scenario(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> WaterScenario {
    let n = spec.hydraulic_nodes;
    let node_id = |i: usize| format!("n{i}");

    let nodes = (0..n)
        .map(|i| {
            let base = rng.gen_range(0.2..1.0);
            let phase = rng.gen_range(0.0..HOURS as f64);
            let mut demand = [0.0; HOURS];
            for (h, d) in demand.iter_mut().enumerate() {
                let angle = 2.0 * std::f64::consts::PI * (h as f64 - phase) / HOURS as f64;
                *d = base * (1.0 + 0.5 * angle.sin());
            }
            HydraulicNode {
                id: node_id(i),
                demand,
            }
        })
        .collect();

    // Flow goes from lower to higher index. Each non-terminal junction has a
    // pipe to a later junction, plus random extras.
    let mut pipes = Vec::new();
    for from in 0..n.saturating_sub(1) {
        let mut targets = vec![rng.gen_range(from + 1..n)];
        for to in from + 1..n {
            if !targets.contains(&to) && rng.gen_bool(spec.pipe_density) {
                targets.push(to);
            }
        }
        targets.sort_unstable();
        let outflow = rng.gen_range(0.5..0.9);
        let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
        let total: f64 = weights.iter().sum();
        for (to, w) in targets.into_iter().zip(weights) {
            pipes.push(Pipe {
                from: node_id(from),
                to: node_id(to),
                travel: rng.gen_range(1..=3),
                fraction: outflow * w / total,
            });
        }
    }

    let placed = index::sample(rng, n, spec.sensors);
    let sensors: BTreeMap<ComponentId, String> = placed
        .iter()
        .enumerate()
        .map(|(s, node)| (format!("s{s}").as_str().into(), node_id(node)))
        .collect();
    let mut injections: Vec<usize> = index::sample(rng, n, spec.injections).into_vec();
    injections.sort_unstable();

    WaterScenario {
        nodes,
        pipes,
        sensors,
        injections: injections.into_iter().map(node_id).collect(),
        theta: 0.02,
        horizon: 48,
        dt: 1.0,
        mass: 1.0,
    }
}

/// On-disk instance: the component graph, the catalog and optional budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub components: SystemModel,
    pub catalog: ImplementationCatalog,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BudgetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackModel>,
}

impl InstanceFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn instance(&self) -> Result<Instance> {
        Instance::new(self.components.clone(), self.catalog.clone())
    }
}

pub fn read_scenario(path: &Path) -> Result<WaterScenario> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
