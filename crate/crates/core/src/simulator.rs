//! Closed-loop epoch-by-epoch integration: follower and leader propagation
//! on a shared fixed RK4 grid, neighbor-packet exchange once per grid step,
//! per-epoch metrics (arrival error, control energy against the
//! minimum-energy value, law agreement, input peaks) and trajectory logging.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{LeaderSignal, LtiFollower, SamplingSchedule};
use crate::controller::{self, EpochContext, OutputChannel, PacketSet};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, NumericPolicy};
use crate::topology::{resolve_offsets, FormationSpec, LeaderNetwork};

/// What the laws steer: the full state, or an output map per follower with
/// the physical input recovered through the output-channel transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackingMode {
    State,
    Output,
}

/// How a follower obtains its out-neighbors' progress signals: from packets
/// the neighbors computed themselves, or by evaluating the same quantities
/// locally from the neighbors' raw states and dynamics. Algebraically
/// identical; packets have the weaker information requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborInfo {
    #[default]
    Packets,
    Dynamics,
}

/// Seeded state jump applied to chosen followers at one sampling instant,
/// before the epoch context is rebuilt.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub epoch: usize,
    pub followers: Vec<usize>,
    pub magnitude: f64,
    pub seed: u64,
}

/// Interaction topology per epoch: a single network, or a staged schedule
/// switching networks at given epoch indices.
#[derive(Debug, Clone)]
pub struct TopologySchedule {
    stages: Vec<(usize, LeaderNetwork)>,
}

impl TopologySchedule {
    pub fn constant(net: LeaderNetwork) -> TopologySchedule {
        TopologySchedule {
            stages: vec![(0, net)],
        }
    }

    /// `stages` maps a starting epoch index to the network active from that
    /// epoch on; must start at epoch 0 and be strictly increasing.
    pub fn staged(stages: Vec<(usize, LeaderNetwork)>) -> Result<TopologySchedule> {
        if stages.is_empty() || stages[0].0 != 0 {
            return Err(Error::Hypothesis(
                "topology schedule must define a network from epoch 0".into(),
            ));
        }
        if stages.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Hypothesis(
                "topology schedule epochs must be strictly increasing".into(),
            ));
        }
        Ok(TopologySchedule { stages })
    }

    pub fn network_for(&self, epoch: usize) -> &LeaderNetwork {
        let idx = self
            .stages
            .iter()
            .rposition(|(from, _)| *from <= epoch)
            .expect("stage 0 always present");
        &self.stages[idx].1
    }

    pub fn networks(&self) -> impl Iterator<Item = &LeaderNetwork> {
        self.stages.iter().map(|(_, n)| n)
    }
}

/// A fully specified run: agents, leader, schedule, topology, formation and
/// numeric settings.
pub struct Scenario {
    pub followers: Vec<LtiFollower>,
    pub leader: LeaderSignal,
    pub schedule: SamplingSchedule,
    pub topology: TopologySchedule,
    pub formation: FormationSpec,
    pub mode: TrackingMode,
    pub neighbor_info: NeighborInfo,
    pub perturbation: Option<Perturbation>,
    pub policy: NumericPolicy,
}

/// Per-follower record of one epoch.
#[derive(Debug, Clone)]
pub struct FollowerEpochMetrics {
    /// `|x_i(t_{k+1}) - (x0(t_k) - F_i0)|` at the law level.
    pub arrival_error: f64,
    /// Trapezoid integral of `u'u` of the law-level input over the epoch.
    pub energy: f64,
    /// Minimum-energy value for this epoch's transfer.
    pub oracle_energy: f64,
    /// Peak absolute physical input over the epoch.
    pub max_abs_input: f64,
}

#[derive(Debug, Clone)]
pub struct EpochMetrics {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub followers: Vec<FollowerEpochMetrics>,
    /// Peak pointwise gap between the distributed and direct laws over the
    /// epoch, relative to the epoch's peak input magnitude.
    pub law_equivalence: f64,
    /// Resolved leader-relative offsets used this epoch, per follower.
    pub offsets: Vec<Vec<f64>>,
    /// Leader sample the epoch steered toward.
    pub leader_sample: Vec<f64>,
}

/// Full trajectory record. Grids of all followers are identical; epoch
/// boundaries lie exactly on the grid. The input logged at a boundary is the
/// closing value of the ending epoch; at `t_0` it is zero.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryLog {
    /// Configured agent identifier per follower slot.
    pub agent_ids: Vec<usize>,
    pub times: Vec<f64>,
    /// Epoch index of each grid point; a boundary belongs to the epoch it
    /// closes and `t_0` to epoch 0.
    pub epoch_of: Vec<usize>,
    /// `states[i][g]` is follower `i`'s physical state at grid point `g`.
    pub states: Vec<Vec<Vec<f64>>>,
    /// Physical inputs, same layout.
    pub inputs: Vec<Vec<Vec<f64>>>,
    /// Law-level states (equal to `states` in state mode; the tracked
    /// outputs in output mode).
    pub law_states: Vec<Vec<Vec<f64>>>,
    /// Law-level inputs (equal to `inputs` in state mode; the output-rate
    /// commands in output mode).
    pub law_inputs: Vec<Vec<Vec<f64>>>,
    pub epochs: Vec<EpochMetrics>,
}

impl TrajectoryLog {
    pub fn follower_count(&self) -> usize {
        self.states.len()
    }

    pub fn grid_len(&self) -> usize {
        self.times.len()
    }
}

/// Max-over-pairs residuals per grid time: state residual
/// `|x_j - x_i - F_ij|` and input residual `|u_i - u_j|` (law level).
#[derive(Debug, Clone)]
pub struct SyncResiduals {
    pub state: Vec<f64>,
    pub input: Vec<f64>,
}

/// Pairwise synchronization residuals of a finished run, using the offsets
/// resolved for each epoch. Descriptive for heterogeneous groups; for
/// homogeneous groups with constant offsets the residuals vanish after the
/// first epoch.
pub fn sync_metrics(log: &TrajectoryLog) -> SyncResiduals {
    let nf = log.follower_count();
    let mut state = Vec::with_capacity(log.grid_len());
    let mut input = Vec::with_capacity(log.grid_len());
    for g in 0..log.grid_len() {
        let offsets = &log.epochs[log.epoch_of[g].min(log.epochs.len().saturating_sub(1))].offsets;
        let mut s_res = 0.0f64;
        let mut u_res = 0.0f64;
        for i in 0..nf {
            for j in (i + 1)..nf {
                let mut ds = 0.0;
                for d in 0..log.law_states[i][g].len() {
                    // x_j - x_i should equal F_ij = F_i0 - F_j0.
                    let f_ij = offsets[i][d] - offsets[j][d];
                    let v = log.law_states[j][g][d] - log.law_states[i][g][d] - f_ij;
                    ds += v * v;
                }
                s_res = s_res.max(ds.sqrt());
                let mut du = 0.0;
                for d in 0..log.law_inputs[i][g].len() {
                    let v = log.law_inputs[i][g][d] - log.law_inputs[j][g][d];
                    du += v * v;
                }
                u_res = u_res.max(du.sqrt());
            }
        }
        state.push(s_res);
        input.push(u_res);
    }
    SyncResiduals { state, input }
}

/// Adds seeded random jumps of the given norm to the chosen followers'
/// states. Applied at sampling instants only, before the next epoch context
/// is built.
pub fn inject_perturbation(
    states: &mut [Matrix],
    followers: &[usize],
    magnitude: f64,
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &i in followers {
        if i >= states.len() {
            return Err(Error::Domain(format!(
                "perturbation references follower {i} outside the group"
            )));
        }
        if magnitude == 0.0 {
            continue;
        }
        let n = states[i].rows();
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for x in &mut v {
            *x *= magnitude / norm;
        }
        states[i] = &states[i] + &Matrix::column(&v)?;
    }
    Ok(())
}

/// In-flight run state; one scenario, single writer.
pub struct SimRun {
    scenario: Scenario,
    xs: Vec<Matrix>,
    channels: Option<Vec<OutputChannel>>,
    log: TrajectoryLog,
}

impl SimRun {
    pub fn new(scenario: Scenario) -> Result<SimRun> {
        let nf = scenario.followers.len();
        if nf == 0 {
            return Err(Error::Hypothesis("scenario needs at least one follower".into()));
        }
        for net in scenario.topology.networks() {
            if net.follower_count() != nf {
                return Err(Error::Hypothesis(format!(
                    "topology has {} followers but the scenario has {nf}",
                    net.follower_count()
                )));
            }
            if !net.verify_global_sink() {
                return Err(Error::Hypothesis(
                    "leader must be a global sink of every scheduled topology".into(),
                ));
            }
        }
        let channels = match scenario.mode {
            TrackingMode::State => {
                let n = scenario.followers[0].state_dim();
                for f in &scenario.followers {
                    if f.state_dim() != n {
                        return Err(Error::Dimension(
                            "state tracking requires a uniform state dimension".into(),
                        ));
                    }
                }
                if scenario.leader.sample_dim() != n {
                    return Err(Error::Dimension(format!(
                        "leader sample dimension {} does not match state dimension {n}",
                        scenario.leader.sample_dim()
                    )));
                }
                if scenario.formation.dim() != n {
                    return Err(Error::Dimension(
                        "formation offsets must match the state dimension".into(),
                    ));
                }
                None
            }
            TrackingMode::Output => {
                let p = scenario.leader.sample_dim();
                let mut chans = Vec::with_capacity(nf);
                for f in &scenario.followers {
                    let c = f.c.as_ref().ok_or_else(|| {
                        Error::Dimension(format!(
                            "follower {} needs an output map for output tracking",
                            f.id
                        ))
                    })?;
                    if c.rows() != p {
                        return Err(Error::Dimension(format!(
                            "follower {} output dimension {} does not match leader dimension {p}",
                            f.id,
                            c.rows()
                        )));
                    }
                    chans.push(OutputChannel::new(f.id, &f.a, &f.b, c)?);
                }
                if scenario.formation.dim() != p {
                    return Err(Error::Dimension(
                        "formation offsets must match the output dimension".into(),
                    ));
                }
                Some(chans)
            }
        };
        if let Some(p) = &scenario.perturbation {
            if scenario.schedule.epoch_count() > 0 && p.epoch >= scenario.schedule.epoch_count() {
                return Err(Error::Domain(format!(
                    "perturbation epoch {} is beyond the schedule",
                    p.epoch
                )));
            }
        }

        let xs: Vec<Matrix> = scenario.followers.iter().map(|f| f.x0.clone()).collect();
        let mut log = TrajectoryLog {
            agent_ids: scenario.followers.iter().map(|f| f.id).collect(),
            times: vec![scenario.schedule.times()[0]],
            epoch_of: vec![0],
            states: vec![Vec::new(); nf],
            inputs: vec![Vec::new(); nf],
            law_states: vec![Vec::new(); nf],
            law_inputs: vec![Vec::new(); nf],
            epochs: Vec::new(),
        };
        let p_law = match scenario.mode {
            TrackingMode::State => scenario.followers[0].state_dim(),
            TrackingMode::Output => scenario.leader.sample_dim(),
        };
        for (i, x) in xs.iter().enumerate() {
            log.states[i].push(x.as_vector());
            log.inputs[i].push(vec![0.0; scenario.followers[i].input_dim()]);
            log.law_inputs[i].push(vec![0.0; p_law]);
        }
        let mut run = SimRun { scenario, xs, channels, log };
        for i in 0..nf {
            let y = run.law_state(i, &run.xs[i]).as_vector();
            run.log.law_states[i].push(y);
        }
        Ok(run)
    }

    fn law_state(&self, i: usize, x: &Matrix) -> Matrix {
        match self.scenario.mode {
            TrackingMode::State => x.clone(),
            TrackingMode::Output => self.scenario.followers[i]
                .c
                .as_ref()
                .expect("output mode validated at construction")
                * x,
        }
    }

    fn law_systems(&self) -> Vec<(Matrix, Matrix)> {
        match self.scenario.mode {
            TrackingMode::State => self
                .scenario
                .followers
                .iter()
                .map(|f| (f.a.clone(), f.b.clone()))
                .collect(),
            TrackingMode::Output => {
                let p = self.scenario.leader.sample_dim();
                (0..self.scenario.followers.len())
                    .map(|_| (Matrix::zeros(p, p), Matrix::identity(p)))
                    .collect()
            }
        }
    }

    /// Builds the packet set for one grid instant, level by level, from the
    /// followers' current physical states.
    fn exchange_packets(
        &self,
        ctx: &EpochContext,
        net: &LeaderNetwork,
        levels: &[Vec<usize>],
        states: &[Matrix],
        t: f64,
    ) -> Result<PacketSet> {
        let mut packets = PacketSet::new(states.len());
        for level in levels {
            for &j in level {
                let law_x = self.law_state(j, &states[j]);
                let p = controller::make_packet(ctx, net, j, &law_x, t, &packets)
                    .map_err(|e| e.in_epoch(ctx.k, j))?;
                if self.scenario.neighbor_info == NeighborInfo::Dynamics {
                    // Receiver-side evaluation: each in-neighbor recomputes
                    // the same quantities from j's raw state and dynamics.
                    // Identical algebra, so the recomputation must agree.
                    for i in 0..states.len() {
                        if net.has_edge(i, j) {
                            let q = controller::make_packet(ctx, net, j, &law_x, t, &packets)
                                .map_err(|e| e.in_epoch(ctx.k, i))?;
                            debug_assert_eq!(q.z.to_row_major(), p.z.to_row_major());
                        }
                    }
                }
                packets.insert(p);
            }
        }
        Ok(packets)
    }

    /// Runs epoch `k` (epochs must run in order), updating the log and
    /// returning the epoch's metrics.
    pub fn run_epoch(&mut self, k: usize) -> Result<&EpochMetrics> {
        if k != self.log.epochs.len() {
            return Err(Error::Domain(format!(
                "epochs must run in order: expected {}, got {k}",
                self.log.epochs.len()
            )));
        }
        let (t_start, t_end) = self.scenario.schedule.epoch(k);
        let steps = self.scenario.policy.steps_per_epoch;
        let h = (t_end - t_start) / steps as f64;
        let nf = self.scenario.followers.len();

        if let Some(p) = self.scenario.perturbation.clone() {
            if p.epoch == k {
                inject_perturbation(&mut self.xs, &p.followers, p.magnitude, p.seed)?;
                // The perturbed state replaces the boundary grid record.
                let g = self.log.times.len() - 1;
                for i in 0..nf {
                    let law_x = self.law_state(i, &self.xs[i]).as_vector();
                    self.log.states[i][g] = self.xs[i].as_vector();
                    self.log.law_states[i][g] = law_x;
                }
            }
        }

        let net = self.scenario.topology.network_for(k).clone();
        let levels = net.hierarchical_levels()?;
        let sample = self.scenario.leader.sample(t_start)?;
        let offsets = resolve_offsets(
            &net,
            &self.scenario.formation,
            k,
            self.scenario.policy.offset_consistency_tol,
        )?;
        let law_states: Vec<Matrix> = (0..nf).map(|i| self.law_state(i, &self.xs[i])).collect();
        let ctx = EpochContext::build(
            k,
            t_start,
            t_end,
            &self.law_systems(),
            &law_states,
            sample.clone(),
            offsets.clone(),
            &self.scenario.policy,
        )?;

        let mut energy = vec![0.0; nf];
        let mut max_abs_u = vec![0.0f64; nf];
        let mut law_gap = 0.0f64;
        let mut law_peak = 0.0f64;
        let mut prev_law_u: Option<Vec<Matrix>> = None;

        for step in 0..steps {
            let t0 = t_start + step as f64 * h;
            let packets = self.exchange_packets(&ctx, &net, &levels, &self.xs, t0)?;

            // Law-level command and physical input at a stage time/state.
            let eval = |i: usize, t: f64, x: &Matrix| -> Result<(Matrix, Matrix)> {
                let v = controller::distributed_law(&ctx, &net, i, &packets, t)
                    .map_err(|e| e.in_epoch(k, i))?;
                let u = match &self.channels {
                    None => v.clone(),
                    Some(ch) => ch[i].control(&v, x),
                };
                Ok((v, u))
            };
            let deriv = |i: usize, x: &Matrix, u: &Matrix| -> Matrix {
                let f = &self.scenario.followers[i];
                &(&f.a * x) + &(&f.b * u)
            };

            let mut k1 = Vec::with_capacity(nf);
            let mut law_u0 = Vec::with_capacity(nf);
            for i in 0..nf {
                let (v, u) = eval(i, t0, &self.xs[i])?;
                max_abs_u[i] = max_abs_u[i].max(u.max_abs());
                let direct = controller::direct_law(&ctx, i, t0).map_err(|e| e.in_epoch(k, i))?;
                law_gap = law_gap.max((&v - &direct).max_abs());
                law_peak = law_peak.max(v.max_abs());
                k1.push(deriv(i, &self.xs[i], &u));
                law_u0.push(v);
            }
            let stage: Vec<Matrix> =
                (0..nf).map(|i| &self.xs[i] + &k1[i].scale(h / 2.0)).collect();
            let mut k2 = Vec::with_capacity(nf);
            for i in 0..nf {
                let (_, u) = eval(i, t0 + h / 2.0, &stage[i])?;
                k2.push(deriv(i, &stage[i], &u));
            }
            let stage: Vec<Matrix> =
                (0..nf).map(|i| &self.xs[i] + &k2[i].scale(h / 2.0)).collect();
            let mut k3 = Vec::with_capacity(nf);
            for i in 0..nf {
                let (_, u) = eval(i, t0 + h / 2.0, &stage[i])?;
                k3.push(deriv(i, &stage[i], &u));
            }
            let stage: Vec<Matrix> = (0..nf).map(|i| &self.xs[i] + &k3[i].scale(h)).collect();
            let mut k4 = Vec::with_capacity(nf);
            let mut u_end = Vec::with_capacity(nf);
            let mut law_u_end = Vec::with_capacity(nf);
            for i in 0..nf {
                let (v, u) = eval(i, t0 + h, &stage[i])?;
                max_abs_u[i] = max_abs_u[i].max(u.max_abs());
                k4.push(deriv(i, &stage[i], &u));
                u_end.push(u);
                law_u_end.push(v);
            }
            for i in 0..nf {
                let incr = &(&(&k1[i] + &k2[i].scale(2.0)) + &k3[i].scale(2.0)) + &k4[i];
                self.xs[i] = &self.xs[i] + &incr.scale(h / 6.0);
            }

            // Trapezoid energy of the law-level input; the opening node of
            // the epoch is the right limit at t_k.
            let u_open = prev_law_u.as_ref().unwrap_or(&law_u0);
            for i in 0..nf {
                let a = (&u_open[i].transpose() * &u_open[i]).get(0, 0);
                let b = (&law_u_end[i].transpose() * &law_u_end[i]).get(0, 0);
                energy[i] += 0.5 * h * (a + b);
            }
            prev_law_u = Some(law_u_end.clone());

            self.log.times.push(t0 + h);
            self.log.epoch_of.push(k);
            for i in 0..nf {
                let law_x = self.law_state(i, &self.xs[i]).as_vector();
                self.log.states[i].push(self.xs[i].as_vector());
                self.log.inputs[i].push(u_end[i].as_vector());
                self.log.law_states[i].push(law_x);
                self.log.law_inputs[i].push(law_u_end[i].as_vector());
            }
        }

        // The leader advances independently on the identical grid.
        self.scenario.leader.advance(t_start, t_end, steps)?;

        let mut per_follower = Vec::with_capacity(nf);
        for i in 0..nf {
            let law_x = self.law_state(i, &self.xs[i]);
            let target = &sample - &ctx.followers[i].offset;
            per_follower.push(FollowerEpochMetrics {
                arrival_error: (&law_x - &target).norm_fro(),
                energy: energy[i],
                oracle_energy: ctx.oracle_energy(i),
                max_abs_input: max_abs_u[i],
            });
        }
        self.log.epochs.push(EpochMetrics {
            k,
            t_start,
            t_end,
            followers: per_follower,
            law_equivalence: if law_peak > 0.0 { law_gap / law_peak } else { 0.0 },
            offsets: offsets.iter().map(|o| o.as_vector()).collect(),
            leader_sample: sample.as_vector(),
        });
        Ok(self.log.epochs.last().unwrap())
    }

    pub fn run_all(mut self) -> Result<TrajectoryLog> {
        for k in 0..self.scenario.schedule.epoch_count() {
            self.run_epoch(k)?;
        }
        Ok(self.log)
    }

    pub fn log(&self) -> &TrajectoryLog {
        &self.log
    }

    pub fn current_states(&self) -> &[Matrix] {
        &self.xs
    }
}

/// Validates and runs a scenario to completion. Deterministic: identical
/// configurations produce bit-identical logs.
pub fn run_scenario(scenario: Scenario) -> Result<TrajectoryLog> {
    SimRun::new(scenario)?.run_all()
}
