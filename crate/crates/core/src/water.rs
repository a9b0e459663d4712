//! Contamination impact on a water-distribution network.
//!
//! Transport is a discrete-time mass model rather than a hydraulic solver.
//! Each step, the mass held at a node plus the mass arriving there is split:
//! every outgoing pipe takes its `fraction` and delivers it `travel` steps
//! later; of the remainder, the share `demand(hour) / peak demand` is
//! consumed at the node and the rest stays held. Total mass is conserved.
//!
//! An alarm is raised by a *functional* sensor: one that is not compromised
//! and reaches an uncompromised interface through uncompromised components.
//! Consumption stops at the alarm step (that step is excluded). The attacker
//! picks the injection candidate with the largest consumption.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::ImpactEvaluator;
use crate::model::{
    ComponentId, ComponentKind, Instance, SystemModel, ValidationReport, Violation,
};
use crate::propagation::CompromisedSet;

pub const HOURS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydraulicNode {
    pub id: String,
    /// Hourly demand profile.
    pub demand: [f64; HOURS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipe {
    pub from: String,
    pub to: String,
    /// Whole time steps, at least 1.
    pub travel: usize,
    /// Share of the upstream node's mass routed into this pipe each step.
    pub fraction: f64,
}

fn unit_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterScenario {
    pub nodes: Vec<HydraulicNode>,
    pub pipes: Vec<Pipe>,
    /// Sensor component → hydraulic node it monitors.
    pub sensors: BTreeMap<ComponentId, String>,
    /// Nodes where the attacker may inject.
    pub injections: Vec<String>,
    /// Detection threshold on arriving mass per step.
    pub theta: f64,
    /// Last simulated step; traces cover steps `0..=horizon`.
    pub horizon: usize,
    /// Step length in hours.
    pub dt: f64,
    /// Injected mass.
    #[serde(default = "unit_mass")]
    pub mass: f64,
}

impl WaterScenario {
    pub fn validate(&self, model: &SystemModel) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut bad = |msg: String| report.push(Violation::Scenario(msg));

        let mut node_ids = HashSet::new();
        for node in &self.nodes {
            if !node_ids.insert(node.id.as_str()) {
                bad(format!("duplicate node `{}`", node.id));
            }
            if node.demand.iter().any(|d| !d.is_finite() || *d < 0.0) {
                bad(format!(
                    "node `{}` has a negative or non-finite demand",
                    node.id
                ));
            }
        }

        let mut outflow: HashMap<&str, f64> = HashMap::new();
        for pipe in &self.pipes {
            for end in [&pipe.from, &pipe.to] {
                if !node_ids.contains(end.as_str()) {
                    bad(format!("pipe references unknown node `{end}`"));
                }
            }
            if pipe.travel == 0 {
                bad(format!(
                    "pipe {} -> {} has zero travel time",
                    pipe.from, pipe.to
                ));
            }
            if !(0.0..=1.0).contains(&pipe.fraction) {
                bad(format!(
                    "pipe {} -> {} has flow fraction {} outside [0, 1]",
                    pipe.from, pipe.to, pipe.fraction
                ));
            }
            *outflow.entry(pipe.from.as_str()).or_default() += pipe.fraction;
        }
        let mut over: Vec<_> = outflow
            .into_iter()
            .filter(|&(_, total)| total > 1.0 + 1e-12)
            .collect();
        over.sort_by(|a, b| a.0.cmp(b.0));
        for (node, total) in over {
            bad(format!(
                "outgoing flow fractions at `{node}` sum to {total} > 1"
            ));
        }

        for (sensor, node) in &self.sensors {
            match model.components.iter().find(|c| &c.id == sensor) {
                None => bad(format!("sensor placement for unknown component `{sensor}`")),
                Some(c) if c.kind != ComponentKind::Sensor => bad(format!(
                    "component `{sensor}` is placed as a sensor but is not one"
                )),
                Some(_) => {}
            }
            if !node_ids.contains(node.as_str()) {
                bad(format!("sensor `{sensor}` placed at unknown node `{node}`"));
            }
        }
        for inj in &self.injections {
            if !node_ids.contains(inj.as_str()) {
                bad(format!("injection candidate `{inj}` is not a node"));
            }
        }
        if self.theta.is_nan() || self.theta < 0.0 {
            bad(format!("detection threshold {} is negative", self.theta));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            bad(format!("step length {} must be positive", self.dt));
        }
        if !self.mass.is_finite() || self.mass <= 0.0 {
            bad(format!("injected mass {} must be positive", self.mass));
        }
        report
    }
}

/// Index-resolved transport graph.
#[derive(Debug, Clone)]
struct Network {
    index: HashMap<String, usize>,
    /// (to, travel, fraction) per node.
    out: Vec<Vec<(usize, usize, f64)>>,
    /// Share of a node's mass left after outgoing pipes.
    remainder: Vec<f64>,
    /// Consumed share of the remainder, per node and hour.
    consume: Vec<[f64; HOURS]>,
    max_travel: usize,
}

impl Network {
    fn new(scenario: &WaterScenario) -> Result<Self> {
        let index: HashMap<String, usize> = scenario
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        if index.len() != scenario.nodes.len() {
            return Err(Error::Domain("duplicate hydraulic node ids".into()));
        }
        let n = scenario.nodes.len();
        let mut out = vec![Vec::new(); n];
        let mut max_travel = 1;
        for pipe in &scenario.pipes {
            let from = *index
                .get(&pipe.from)
                .ok_or_else(|| Error::Domain(format!("unknown node `{}`", pipe.from)))?;
            let to = *index
                .get(&pipe.to)
                .ok_or_else(|| Error::Domain(format!("unknown node `{}`", pipe.to)))?;
            if pipe.travel == 0 {
                return Err(Error::Domain("pipe travel time must be at least 1".into()));
            }
            max_travel = max_travel.max(pipe.travel);
            out[from].push((to, pipe.travel, pipe.fraction));
        }
        let remainder = out
            .iter()
            .map(|pipes| (1.0 - pipes.iter().map(|p| p.2).sum::<f64>()).max(0.0))
            .collect();
        let consume = scenario
            .nodes
            .iter()
            .map(|node| {
                let peak = node.demand.iter().cloned().fold(0.0, f64::max);
                let mut share = [0.0; HOURS];
                if peak > 0.0 {
                    for (s, d) in share.iter_mut().zip(node.demand.iter()) {
                        *s = d / peak;
                    }
                }
                share
            })
            .collect();
        Ok(Network {
            index,
            out,
            remainder,
            consume,
            max_travel,
        })
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown hydraulic node `{id}`")))
    }
}

/// Per-step mass traces for one injection. Every vector has `horizon + 1`
/// entries, one per step.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationTrace {
    pub injection: String,
    pub injected: f64,
    /// Mass arriving at each node, `[step][node]`.
    pub arriving: Vec<Vec<f64>>,
    /// Mass consumed at each node, `[step][node]`.
    pub consumed: Vec<Vec<f64>>,
    /// Mass held at nodes after the step.
    pub held: Vec<f64>,
    /// Mass inside pipes after the step.
    pub in_transit: Vec<f64>,
}

impl ContaminationTrace {
    pub fn steps(&self) -> usize {
        self.arriving.len()
    }

    /// Total consumption over steps `0..end`.
    pub fn consumed_before(&self, end: usize) -> f64 {
        self.consumed[..end.min(self.steps())]
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .sum()
    }

    /// `consumed so far + held + in transit` after each step.
    pub fn mass_balance(&self) -> Vec<f64> {
        let mut cumulative = 0.0;
        (0..self.steps())
            .map(|t| {
                cumulative += self.consumed[t].iter().sum::<f64>();
                cumulative + self.held[t] + self.in_transit[t]
            })
            .collect()
    }
}

pub fn simulate_contamination(
    scenario: &WaterScenario,
    injection: &str,
) -> Result<ContaminationTrace> {
    if !scenario.injections.iter().any(|i| i == injection) {
        return Err(Error::Domain(format!(
            "`{injection}` is not an injection candidate"
        )));
    }
    let net = Network::new(scenario)?;
    let source = net.node(injection)?;
    Ok(simulate(&net, scenario, source, injection))
}

fn simulate(
    net: &Network,
    scenario: &WaterScenario,
    source: usize,
    label: &str,
) -> ContaminationTrace {
    let n = scenario.nodes.len();
    let steps = scenario.horizon + 1;
    // Arrivals scheduled past the horizon still count as in transit.
    let mut pending = vec![vec![0.0; n]; steps + net.max_travel];
    let mut held = vec![0.0; n];
    let mut trace = ContaminationTrace {
        injection: label.to_owned(),
        injected: scenario.mass,
        arriving: Vec::with_capacity(steps),
        consumed: Vec::with_capacity(steps),
        held: Vec::with_capacity(steps),
        in_transit: Vec::with_capacity(steps),
    };

    for t in 0..steps {
        let mut arriving = std::mem::take(&mut pending[t]);
        if t == 0 {
            arriving[source] += scenario.mass;
        }
        let hour = ((t as f64 * scenario.dt).floor() as usize) % HOURS;
        let mut consumed = vec![0.0; n];
        for node in 0..n {
            let mass = held[node] + arriving[node];
            if mass == 0.0 {
                continue;
            }
            for &(to, travel, fraction) in &net.out[node] {
                pending[t + travel][to] += fraction * mass;
            }
            let rest = mass * net.remainder[node];
            let used = rest * net.consume[node][hour];
            consumed[node] = used;
            held[node] = rest - used;
        }
        trace.held.push(held.iter().sum());
        trace.in_transit.push(
            pending[t + 1..]
                .iter()
                .map(|row| row.iter().sum::<f64>())
                .sum(),
        );
        trace.arriving.push(arriving);
        trace.consumed.push(consumed);
    }
    trace
}

/// First step at which `node` receives a positive arriving mass of at least
/// `theta`.
fn first_alarm(trace: &ContaminationTrace, node: usize, theta: f64) -> Option<usize> {
    trace
        .arriving
        .iter()
        .position(|row| row[node] > 0.0 && row[node] >= theta)
}

/// Components that can pass an alert to an uncompromised interface through
/// uncompromised components (themselves included).
pub fn alert_reachable(instance: &Instance, compromised: &CompromisedSet) -> Vec<bool> {
    let n = instance.num_components();
    let mut reach = vec![false; n];
    let mut queue = VecDeque::new();
    for (c, r) in reach.iter_mut().enumerate() {
        if instance.kind(c) == ComponentKind::Interface && !compromised.contains(c) {
            *r = true;
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        for &origin in instance.inputs(c) {
            if !reach[origin] && !compromised.contains(origin) {
                reach[origin] = true;
                queue.push_back(origin);
            }
        }
    }
    reach
}

/// Earliest step at which a functional sensor sees the contaminant.
pub fn detection_time(
    scenario: &WaterScenario,
    trace: &ContaminationTrace,
    compromised: &CompromisedSet,
    instance: &Instance,
) -> Result<Option<usize>> {
    let net = Network::new(scenario)?;
    let reach = alert_reachable(instance, compromised);
    let mut earliest: Option<usize> = None;
    for (sensor, node) in &scenario.sensors {
        let c = instance
            .component_index(sensor)
            .ok_or_else(|| Error::Domain(format!("unknown sensor component `{sensor}`")))?;
        if compromised.contains(c) || !reach[c] {
            continue;
        }
        if let Some(t) = first_alarm(trace, net.node(node)?, scenario.theta) {
            earliest = Some(earliest.map_or(t, |e| e.min(t)));
        }
    }
    Ok(earliest)
}

/// Worst-case consumed mass over all injection candidates. Simulates from
/// scratch; [`WaterImpact`] precomputes the same quantity.
pub fn water_impact(
    scenario: &WaterScenario,
    instance: &Instance,
    compromised: &CompromisedSet,
) -> Result<f64> {
    if scenario.injections.is_empty() {
        return Err(Error::Domain("scenario has no injection candidates".into()));
    }
    let mut worst: f64 = 0.0;
    for inj in &scenario.injections {
        let trace = simulate_contamination(scenario, inj)?;
        let end = detection_time(scenario, &trace, compromised, instance)?.unwrap_or(trace.steps());
        worst = worst.max(trace.consumed_before(end));
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
struct CandidateProfile {
    /// `prefix[k]` = consumption over steps `0..k`.
    prefix: Vec<f64>,
    /// First alarm step for each entry of `WaterImpact::sensors`.
    alarms: Vec<Option<usize>>,
}

/// Water impact evaluator with traces simulated once up front.
#[derive(Debug, Clone)]
pub struct WaterImpact {
    instance: Instance,
    sensors: Vec<usize>,
    candidates: Vec<CandidateProfile>,
}

impl WaterImpact {
    pub fn new(scenario: &WaterScenario, instance: &Instance) -> Result<Self> {
        let report = scenario.validate(instance.model());
        if !report.is_empty() {
            return Err(Error::Validation(report));
        }
        if scenario.injections.is_empty() {
            return Err(Error::Domain("scenario has no injection candidates".into()));
        }
        let net = Network::new(scenario)?;
        let mut sensors = Vec::new();
        let mut sensor_nodes = Vec::new();
        for (sensor, node) in &scenario.sensors {
            sensors.push(instance.component_index(sensor).expect("validated"));
            sensor_nodes.push(net.node(node)?);
        }
        let candidates = scenario
            .injections
            .iter()
            .map(|inj| {
                let trace = simulate(&net, scenario, net.node(inj)?, inj);
                let mut prefix = Vec::with_capacity(trace.steps() + 1);
                prefix.push(0.0);
                let mut total = 0.0;
                for row in &trace.consumed {
                    total += row.iter().sum::<f64>();
                    prefix.push(total);
                }
                let alarms = sensor_nodes
                    .iter()
                    .map(|&node| first_alarm(&trace, node, scenario.theta))
                    .collect();
                Ok(CandidateProfile { prefix, alarms })
            })
            .collect::<Result<_>>()?;
        Ok(WaterImpact {
            instance: instance.clone(),
            sensors,
            candidates,
        })
    }
}

impl ImpactEvaluator for WaterImpact {
    fn impact(&self, compromised: &CompromisedSet) -> Result<f64> {
        let reach = alert_reachable(&self.instance, compromised);
        let functional: Vec<bool> = self
            .sensors
            .iter()
            .map(|&c| reach[c] && !compromised.contains(c))
            .collect();
        let mut worst: f64 = 0.0;
        for cand in &self.candidates {
            let end = cand
                .alarms
                .iter()
                .zip(&functional)
                .filter_map(|(alarm, &ok)| if ok { *alarm } else { None })
                .min()
                .unwrap_or(cand.prefix.len() - 1);
            worst = worst.max(cand.prefix[end]);
        }
        Ok(worst)
    }

    fn is_monotone(&self) -> bool {
        true
    }
}
