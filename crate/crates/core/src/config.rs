//! Scenario configuration: a single TOML file declaring followers, leader,
//! topology, formation offsets, schedule and integration settings. Loading
//! validates every precondition up front and reports all violations at once.
//! Three built-in scenarios ship with the crate: `msd` (heterogeneous
//! mass-spring-dampers in a chain formation behind a nonlinear leader),
//! `waypoints` (bounded-input double integrators traversing reference
//! states at designed arrival times) and `aircraft` (pitch-rate output
//! tracking for a group of short-period models).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{InputFn, LeaderSignal, LtiFollower, SamplingSchedule};
use crate::arrivals::{self, WaypointPlan};
use crate::error::{Error, Result};
use crate::gramian;
use crate::matrix::{Matrix, NumericPolicy};
use crate::simulator::{
    NeighborInfo, Perturbation, Scenario, TopologySchedule, TrackingMode,
};
use crate::topology::{FormationSpec, LeaderNetwork, Peer};

pub const BUILTIN_MSD: &str = include_str!("../scenarios/msd.toml");
pub const BUILTIN_WAYPOINTS: &str = include_str!("../scenarios/waypoints.toml");
pub const BUILTIN_AIRCRAFT: &str = include_str!("../scenarios/aircraft.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_mode")]
    pub mode: ModeConfig,
    #[serde(default)]
    pub integration: IntegrationConfig,
    pub leader: LeaderConfig,
    #[serde(rename = "follower")]
    pub followers: Vec<FollowerConfig>,
    pub topology: TopologyConfig,
    #[serde(default, rename = "offset")]
    pub offsets: Vec<OffsetConfig>,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    State,
    Output,
}

fn default_mode() -> ModeConfig {
    ModeConfig::State
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    pub steps_per_epoch: Option<usize>,
    pub deadzone_steps: Option<usize>,
    /// Enables the widened-kernel mitigation with the given fraction of the
    /// epoch length (in place of the default deadzone handling).
    pub delta_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeaderConfig {
    /// Sampled values assigned in order to the schedule's sampling instants.
    Waypoints { values: Vec<Vec<f64>> },
    Lti {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        x0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        input: InputConfig,
    },
    /// Mass-spring-damper with cubic stiffness `c3 x^3`.
    CubicMsd {
        k: f64,
        b: f64,
        m: f64,
        c3: f64,
        x0: Vec<f64>,
        #[serde(default)]
        input: InputConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputConfig {
    #[default]
    Zero,
    Constant { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerConfig {
    pub id: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    /// Directed edges `[i, j]`: follower `i` observes follower `j` (ids as
    /// configured, leader excluded).
    pub edges: Vec<[usize; 2]>,
    /// Followers that observe the leader directly.
    pub leader_edges: Vec<usize>,
    /// Optional staged replacements taking effect at later epochs.
    #[serde(default, rename = "stage", skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<TopologyStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyStage {
    pub from_epoch: usize,
    pub edges: Vec<[usize; 2]>,
    pub leader_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetConfig {
    pub from: usize,
    /// Out-neighbor the offset refers to; 0 names the leader.
    pub to: usize,
    pub value: Vec<f64>,
    /// When present the entry applies from this sampling index only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Explicit { times: Vec<f64> },
    Uniform { dt: f64, count: usize },
    /// Arrival times designed so that no follower's input exceeds the bound.
    Design { u_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub epoch: usize,
    pub followers: Vec<usize>,
    pub magnitude: f64,
    pub seed: u64,
}

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub steps_per_epoch: Option<usize>,
    pub deadzone_steps: Option<usize>,
    pub seed: Option<u64>,
    pub bisection_tol: Option<f64>,
}

/// A validated, runnable scenario together with the designed plan when the
/// schedule was produced by the arrival-time designer.
pub struct BuiltScenario {
    pub name: String,
    pub scenario: Scenario,
    pub plan: Option<WaypointPlan>,
    pub policy: NumericPolicy,
    /// Per-follower symmetric input bound when every configured bound agrees.
    pub input_bound: Option<f64>,
}

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "msd" => Some(BUILTIN_MSD),
        "waypoints" => Some(BUILTIN_WAYPOINTS),
        "aircraft" => Some(BUILTIN_AIRCRAFT),
        _ => None,
    }
}

pub fn load_config_str(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text)
}

/// Resolves a scenario argument: a built-in name or a path to a TOML file.
pub fn load_scenario_source(arg: &str) -> Result<ScenarioConfig> {
    if let Some(text) = builtin(arg) {
        return load_config_str(text);
    }
    load_config(Path::new(arg))
}

fn parse_matrix(rows: &[Vec<f64>], what: &str, issues: &mut Vec<String>) -> Option<Matrix> {
    if rows.is_empty() || rows[0].is_empty() {
        issues.push(format!("{what}: matrix must be non-empty"));
        return None;
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        issues.push(format!("{what}: ragged matrix rows"));
        return None;
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    match Matrix::from_rows(rows.len(), cols, &flat) {
        Ok(m) => Some(m),
        Err(e) => {
            issues.push(format!("{what}: {e}"));
            None
        }
    }
}

impl ScenarioConfig {
    /// Checks every precondition and returns all violations found.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        self.build_inner(&RunOverrides::default(), &mut issues);
        issues
    }

    /// Validates and assembles the runnable scenario.
    pub fn build(&self, overrides: &RunOverrides) -> Result<BuiltScenario> {
        let mut issues = Vec::new();
        let built = self.build_inner(overrides, &mut issues);
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        built.ok_or_else(|| Error::Validation(vec!["scenario could not be assembled".into()]))
    }

    fn policy(&self, overrides: &RunOverrides) -> NumericPolicy {
        let mut policy = NumericPolicy::default();
        if let Some(s) = self.integration.steps_per_epoch {
            policy.steps_per_epoch = s;
        }
        if let Some(d) = self.integration.deadzone_steps {
            policy.deadzone_steps = d;
        }
        policy.delta_fraction = self.integration.delta_fraction;
        if let Some(s) = overrides.steps_per_epoch {
            policy.steps_per_epoch = s;
        }
        if let Some(d) = overrides.deadzone_steps {
            policy.deadzone_steps = d;
        }
        if let Some(t) = overrides.bisection_tol {
            policy.bisection_tol = t;
        }
        policy
    }

    fn build_inner(
        &self,
        overrides: &RunOverrides,
        issues: &mut Vec<String>,
    ) -> Option<BuiltScenario> {
        let policy = self.policy(overrides);
        if policy.steps_per_epoch == 0 {
            issues.push("integration: steps_per_epoch must be positive".into());
        }
        if let Some(f) = policy.delta_fraction {
            if f <= 0.0 || f >= 1.0 {
                issues.push("integration: delta_fraction must lie in (0, 1)".into());
            }
        }

        // Followers: ids must be the contiguous range 1..=N.
        let nf = self.followers.len();
        if nf == 0 {
            issues.push("at least one follower is required".into());
            return None;
        }
        let mut by_id: Vec<Option<&FollowerConfig>> = vec![None; nf];
        for f in &self.followers {
            if f.id == 0 || f.id > nf {
                issues.push(format!(
                    "follower {}: ids must cover 1..={nf} (0 is the leader)",
                    f.id
                ));
            } else if by_id[f.id - 1].is_some() {
                issues.push(format!("follower {}: duplicate id", f.id));
            } else {
                by_id[f.id - 1] = Some(f);
            }
        }
        let ordered: Vec<&FollowerConfig> = match by_id.into_iter().collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => return None,
        };

        let mut followers = Vec::with_capacity(nf);
        for fc in &ordered {
            let label = format!("follower {}", fc.id);
            let a = parse_matrix(&fc.a, &format!("{label}: A"), issues)?;
            let b = parse_matrix(&fc.b, &format!("{label}: B"), issues)?;
            let x0 = match Matrix::column(&fc.x0) {
                Ok(v) => v,
                Err(e) => {
                    issues.push(format!("{label}: x0: {e}"));
                    return None;
                }
            };
            let c = match &fc.c {
                Some(c) => Some(parse_matrix(c, &format!("{label}: C"), issues)?),
                None => None,
            };
            let bounds = match (fc.u_min, fc.u_max) {
                (None, None) => None,
                (Some(lo), Some(hi)) => {
                    if b.cols() != 1 {
                        issues.push(format!("{label}: input bounds require a single input"));
                    }
                    Some(vec![(lo, hi)])
                }
                _ => {
                    issues.push(format!("{label}: u_min and u_max must both be given"));
                    None
                }
            };
            match LtiFollower::new(fc.id, a, b, x0, c, bounds) {
                Ok(f) => followers.push(f),
                Err(e) => {
                    issues.push(format!("{label}: {e}"));
                }
            }
        }
        if followers.len() != nf {
            return None;
        }

        let mode = match self.mode {
            ModeConfig::State => TrackingMode::State,
            ModeConfig::Output => TrackingMode::Output,
        };

        // Topology stages.
        let to_network = |edges: &[[usize; 2]], leader_edges: &[usize], issues: &mut Vec<String>| {
            let mut shifted = Vec::with_capacity(edges.len());
            for &[i, j] in edges {
                if i == 0 || j == 0 || i > nf || j > nf {
                    issues.push(format!(
                        "topology: edge [{i}, {j}] must reference followers 1..={nf}"
                    ));
                    return None;
                }
                shifted.push((i - 1, j - 1));
            }
            let mut attached = Vec::with_capacity(leader_edges.len());
            for &i in leader_edges {
                if i == 0 || i > nf {
                    issues.push(format!("topology: leader edge {i} must reference a follower"));
                    return None;
                }
                attached.push(i - 1);
            }
            match LeaderNetwork::new(nf, &shifted, &attached) {
                Ok(net) => {
                    if !net.verify_global_sink() {
                        issues.push(
                            "topology: the leader must be reachable from every follower".into(),
                        );
                        None
                    } else {
                        Some(net)
                    }
                }
                Err(e) => {
                    issues.push(format!("topology: {e}"));
                    None
                }
            }
        };
        let base = to_network(&self.topology.edges, &self.topology.leader_edges, issues);
        let mut stages = vec![(0usize, base?)];
        for st in &self.topology.stages {
            if st.from_epoch == 0 {
                issues.push("topology: staged replacement cannot start at epoch 0".into());
                continue;
            }
            if let Some(net) = to_network(&st.edges, &st.leader_edges, issues) {
                stages.push((st.from_epoch, net));
            } else {
                return None;
            }
        }
        stages.sort_by_key(|(k, _)| *k);
        let topology = match TopologySchedule::staged(stages) {
            Ok(t) => t,
            Err(e) => {
                issues.push(format!("topology: {e}"));
                return None;
            }
        };

        // Law dimension: state dimension or leader output dimension.
        let law_dim = match mode {
            TrackingMode::State => followers[0].state_dim(),
            TrackingMode::Output => match &self.leader {
                LeaderConfig::Waypoints { values } => values.first().map_or(0, |v| v.len()),
                LeaderConfig::Lti { output: Some(c), .. } => c.len(),
                LeaderConfig::Lti { a, output: None, .. } => a.len(),
                LeaderConfig::CubicMsd { .. } => 2,
            },
        };

        // Formation offsets.
        let mut constant_table: BTreeMap<(usize, Peer), Matrix> = BTreeMap::new();
        let mut epoch_entries: Vec<(usize, (usize, Peer), Matrix)> = Vec::new();
        for oc in &self.offsets {
            if oc.from == 0 || oc.from > nf {
                issues.push(format!("offset: from = {} is not a follower", oc.from));
                continue;
            }
            let from = oc.from - 1;
            let peer = if oc.to == 0 {
                Peer::Leader
            } else if oc.to > nf {
                issues.push(format!("offset: to = {} is not a follower or the leader", oc.to));
                continue;
            } else {
                Peer::Follower(oc.to - 1)
            };
            let edge_exists = topology.networks().all(|net| match peer {
                Peer::Leader => net.indicator(from) == 1,
                Peer::Follower(j) => net.has_edge(from, j),
            });
            if !edge_exists {
                issues.push(format!(
                    "offset: ({}, {}) is not an edge of every scheduled topology",
                    oc.from, oc.to
                ));
                continue;
            }
            let v = match Matrix::column(&oc.value) {
                Ok(v) if v.rows() == law_dim => v,
                Ok(_) => {
                    issues.push(format!(
                        "offset ({}, {}): value must be a {law_dim}-vector",
                        oc.from, oc.to
                    ));
                    continue;
                }
                Err(e) => {
                    issues.push(format!("offset ({}, {}): {e}", oc.from, oc.to));
                    continue;
                }
            };
            match oc.epoch {
                None => {
                    constant_table.insert((from, peer), v);
                }
                Some(k) => epoch_entries.push((k, (from, peer), v)),
            }
        }
        let formation = if epoch_entries.is_empty() {
            FormationSpec::constant(law_dim, constant_table)
        } else {
            let max_k = epoch_entries.iter().map(|(k, _, _)| *k).max().unwrap();
            let mut tables = Vec::with_capacity(max_k + 1);
            let mut current = constant_table.clone();
            for k in 0..=max_k {
                for (ek, key, v) in &epoch_entries {
                    if *ek == k {
                        current.insert(*key, v.clone());
                    }
                }
                tables.push(current.clone());
            }
            FormationSpec::per_epoch(law_dim, tables)
        };
        let formation = match formation {
            Ok(f) => f,
            Err(e) => {
                issues.push(format!("offsets: {e}"));
                return None;
            }
        };

        // Schedule (and designed plan if requested).
        let mut plan = None;
        let times: Vec<f64> = match &self.schedule {
            ScheduleConfig::Explicit { times } => times.clone(),
            ScheduleConfig::Uniform { dt, count } => {
                if *dt <= 0.0 {
                    issues.push("schedule: dt must be positive".into());
                    return None;
                }
                (0..=*count).map(|k| k as f64 * dt).collect()
            }
            ScheduleConfig::Design { u_max } => {
                let values = match &self.leader {
                    LeaderConfig::Waypoints { values } => values,
                    _ => {
                        issues.push(
                            "schedule: arrival-time design requires a waypoint leader".into(),
                        );
                        return None;
                    }
                };
                for f in &followers {
                    if !arrivals::is_double_integrator(&f.a, &f.b) {
                        issues.push(format!(
                            "schedule: arrival-time design covers double integrators only; follower {} differs",
                            f.id
                        ));
                        return None;
                    }
                }
                let mut wps = Vec::with_capacity(values.len());
                for v in values {
                    if v.len() != 2 {
                        issues.push("schedule: waypoints must be 2-vectors".into());
                        return None;
                    }
                    wps.push([v[0], v[1]]);
                }
                let inits: Vec<Matrix> = followers.iter().map(|f| f.x0.clone()).collect();
                match arrivals::design_plan(&inits, &wps, *u_max, &policy) {
                    Ok(p) => {
                        let times = p.times.clone();
                        plan = Some(p);
                        times
                    }
                    Err(e) => {
                        issues.push(format!("schedule: {e}"));
                        return None;
                    }
                }
            }
        };
        let schedule = match SamplingSchedule::new(times) {
            Ok(s) => s,
            Err(e) => {
                issues.push(format!("schedule: {e}"));
                return None;
            }
        };

        // Leader signal.
        let make_input = |cfg: &InputConfig, issues: &mut Vec<String>| -> Option<InputFn> {
            match cfg {
                InputConfig::Zero => None,
                InputConfig::Constant { value } => {
                    let v = match Matrix::column(value) {
                        Ok(v) => v,
                        Err(e) => {
                            issues.push(format!("leader input: {e}"));
                            return None;
                        }
                    };
                    Some(Box::new(move |_t| v.clone()))
                }
            }
        };
        let leader = match &self.leader {
            LeaderConfig::Waypoints { values } => {
                if values.len() < schedule.epoch_count() {
                    issues.push(format!(
                        "leader: {} waypoint values cannot cover {} epochs",
                        values.len(),
                        schedule.epoch_count()
                    ));
                    return None;
                }
                let mut table = Vec::with_capacity(schedule.epoch_count());
                for (k, v) in values.iter().enumerate().take(schedule.epoch_count().max(1)) {
                    let value = match Matrix::column(v) {
                        Ok(m) => m,
                        Err(e) => {
                            issues.push(format!("leader value {k}: {e}"));
                            return None;
                        }
                    };
                    table.push((schedule.times()[k], value));
                }
                LeaderSignal::waypoints(table)
            }
            LeaderConfig::Lti { a, b, x0, output, input } => {
                let am = parse_matrix(a, "leader: A", issues)?;
                let bm = parse_matrix(b, "leader: B", issues)?;
                let x0 = match Matrix::column(x0) {
                    Ok(v) => v,
                    Err(e) => {
                        issues.push(format!("leader: x0: {e}"));
                        return None;
                    }
                };
                let out_map = match output {
                    Some(c) => Some(parse_matrix(c, "leader: output", issues)?),
                    None => None,
                };
                LeaderSignal::lti(am, bm, x0, make_input(input, issues)).and_then(|sig| {
                    match out_map {
                        Some(cm) => sig.with_output(cm),
                        None => Ok(sig),
                    }
                })
            }
            LeaderConfig::CubicMsd { k, b, m, c3, x0, input } => {
                let x0 = match Matrix::column(x0) {
                    Ok(v) if v.rows() == 2 => v,
                    Ok(_) => {
                        issues.push("leader: x0 must be a 2-vector".into());
                        return None;
                    }
                    Err(e) => {
                        issues.push(format!("leader: x0: {e}"));
                        return None;
                    }
                };
                LeaderSignal::cubic_msd(*k, *b, *m, *c3, x0, make_input(input, issues))
            }
        };
        let leader = match leader {
            Ok(l) => l,
            Err(e) => {
                issues.push(format!("leader: {e}"));
                return None;
            }
        };

        // Mode-level dimension checks (the simulator re-checks, but the
        // validation report should carry them too).
        match mode {
            TrackingMode::State => {
                let n = followers[0].state_dim();
                for f in &followers {
                    if f.state_dim() != n {
                        issues.push(format!(
                            "follower {}: state tracking requires uniform state dimension {n}",
                            f.id
                        ));
                    }
                }
                if leader.sample_dim() != n {
                    issues.push(format!(
                        "leader: sample dimension {} does not match the follower state dimension {n}",
                        leader.sample_dim()
                    ));
                }
            }
            TrackingMode::Output => {
                let p = leader.sample_dim();
                for f in &followers {
                    match f.output_dim() {
                        None => issues.push(format!(
                            "follower {}: output tracking requires an output map",
                            f.id
                        )),
                        Some(q) if q != p => issues.push(format!(
                            "follower {}: output dimension {q} does not match the leader's {p}",
                            f.id
                        )),
                        Some(_) => {
                            if let Some(c) = &f.c {
                                let cb = c * &f.b;
                                match crate::matrix::rank(&cb, 0.0) {
                                    Ok(r) if r == p => {}
                                    Ok(_) => issues.push(format!(
                                        "follower {}: C B must have full row rank for output tracking",
                                        f.id
                                    )),
                                    Err(e) => issues.push(format!("follower {}: {e}", f.id)),
                                }
                            }
                        }
                    }
                }
            }
        }

        // Offset path consistency, checked over the early sampling indices.
        for net in topology.networks() {
            for k in 0..3usize {
                if let Err(e) = crate::topology::resolve_offsets(
                    net,
                    &formation,
                    k,
                    policy.offset_consistency_tol,
                ) {
                    issues.push(format!("offsets: {e}"));
                    break;
                }
            }
        }

        // Perturbation.
        let perturbation = match &self.perturbation {
            None => None,
            Some(p) => {
                let mut idx = Vec::with_capacity(p.followers.len());
                for &id in &p.followers {
                    if id == 0 || id > nf {
                        issues.push(format!("perturbation: follower {id} does not exist"));
                    } else {
                        idx.push(id - 1);
                    }
                }
                if schedule.epoch_count() > 0 && p.epoch >= schedule.epoch_count() {
                    issues.push(format!(
                        "perturbation: epoch {} is beyond the {}-epoch schedule",
                        p.epoch,
                        schedule.epoch_count()
                    ));
                }
                Some(Perturbation {
                    epoch: p.epoch,
                    followers: idx,
                    magnitude: p.magnitude,
                    seed: overrides.seed.unwrap_or(p.seed),
                })
            }
        };

        // Uniform symmetric input bound, when configured consistently.
        let mut input_bound = None;
        let bounds: Vec<Option<(f64, f64)>> = followers
            .iter()
            .map(|f| f.u_bounds.as_ref().map(|b| b[0]))
            .collect();
        if bounds.iter().all(|b| b.is_some()) {
            let first = bounds[0].unwrap();
            if bounds.iter().all(|b| b.unwrap() == first) && first.0 == -first.1 {
                input_bound = Some(first.1);
            }
        }

        // Controllability was already enforced per follower at construction.
        for f in &followers {
            debug_assert!(gramian::is_controllable(&f.a, &f.b).unwrap_or(false));
        }

        if !issues.is_empty() {
            return None;
        }
        Some(BuiltScenario {
            name: self.name.clone(),
            scenario: Scenario {
                followers,
                leader,
                schedule,
                topology,
                formation,
                mode,
                neighbor_info: NeighborInfo::Packets,
                perturbation,
                policy,
            },
            plan,
            policy,
            input_bound,
        })
    }
}
