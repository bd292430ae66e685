//! Control laws. Followers with direct leader access steer with the
//! classical minimum-energy law toward the latest sample; the distributed
//! law blends that leader term with neighbor packets so that followers
//! without leader access reconstruct the same steering target through the
//! graph. Along exact closed-loop trajectories the two laws coincide.
//!
//! Neighbor packets carry `z_j(t) = G_k P_j(t) (x_j(t) - e^{A_j (t-t_k)}
//! x_j(t_k))` together with the frozen drift target `e^{A_j T_k} x_j(t_k)`.
//! The kernel inverse `P_j` blows up just after each sampling instant, so
//! inside a short deadzone window (and whenever the solve would amplify
//! state roundoff beyond the policy cap) the packet instead carries the
//! limit value of `z_j`, reconstructed from the sender's own incoming
//! packets level by level. On exact trajectories both forms agree.

use crate::error::{Error, Result};
use crate::gramian::{self, GramianPropagator};
use crate::matrix::{self, Matrix, NumericPolicy};
use crate::topology::LeaderNetwork;

/// Per-follower data frozen at the start of a sampling epoch.
#[derive(Debug, Clone)]
pub struct FollowerEpoch {
    pub x_at_tk: Matrix,
    /// `e^{A T_k}`.
    pub expm_atk: Matrix,
    /// Epoch Gramian `G_k`.
    pub g_k: Matrix,
    pub propagator: GramianPropagator,
    /// Resolved offset with respect to the leader.
    pub offset: Matrix,
    b_t: Matrix,
    g_inv: Matrix,
    g_norm_one: f64,
}

/// Everything the laws need during one epoch `(t_k, t_{k+1}]`. Frozen at
/// epoch start; rebuilt from scratch at every sampling instant.
pub struct EpochContext {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub leader_sample: Matrix,
    pub followers: Vec<FollowerEpoch>,
    pub policy: NumericPolicy,
    /// Simulation grid step; packet deadzone spans `deadzone_steps` of these.
    pub grid_step: f64,
}

impl EpochContext {
    /// Builds the per-epoch precomputation. `systems` are the per-follower
    /// law-level pairs `(A, B)`, `states` the law-level states at `t_k`,
    /// `offsets` the resolved leader-relative offsets.
    pub fn build(
        k: usize,
        t_start: f64,
        t_end: f64,
        systems: &[(Matrix, Matrix)],
        states: &[Matrix],
        leader_sample: Matrix,
        offsets: Vec<Matrix>,
        policy: &NumericPolicy,
    ) -> Result<EpochContext> {
        if t_end <= t_start {
            return Err(Error::Domain(format!(
                "epoch must have positive length, got [{t_start}, {t_end}]"
            )));
        }
        if systems.len() != states.len() || systems.len() != offsets.len() {
            return Err(Error::Dimension(
                "systems, states and offsets must have one entry per follower".into(),
            ));
        }
        let horizon = t_end - t_start;
        let lead_in = policy.delta_fraction.map_or(0.0, |f| f * horizon);
        let substeps = 2 * policy.steps_per_epoch;
        let mut followers = Vec::with_capacity(systems.len());
        for (i, ((a, b), x)) in systems.iter().zip(states).enumerate() {
            let n = a.rows();
            if leader_sample.rows() != n {
                return Err(Error::Dimension(format!(
                    "leader sample dimension {} does not match follower state dimension {n}",
                    leader_sample.rows()
                )));
            }
            let build = || -> Result<FollowerEpoch> {
                let propagator = GramianPropagator::new(a, b, t_start, t_end, substeps, lead_in)?;
                let g_k = propagator.epoch_gramian().clone();
                let g_inv = matrix::solve(&g_k, &Matrix::identity(n), policy.cond_cap)?;
                Ok(FollowerEpoch {
                    x_at_tk: x.clone(),
                    expm_atk: matrix::expm(a, horizon)?,
                    g_norm_one: g_k.norm_one(),
                    g_k,
                    propagator,
                    offset: offsets[i].clone(),
                    b_t: b.transpose(),
                    g_inv,
                })
            };
            followers.push(build().map_err(|e| e.in_epoch(k, i))?);
        }
        Ok(EpochContext {
            k,
            t_start,
            t_end,
            leader_sample,
            followers,
            policy: *policy,
            grid_step: horizon / policy.steps_per_epoch as f64,
        })
    }

    /// Steering residual of follower `i`: the sampled target minus the free
    /// drift, `x0(t_k) - F_i0 - e^{A T_k} x_i(t_k)`. The law drives the
    /// epoch-end state error to zero exactly when this is steered out.
    pub fn steering_residual(&self, i: usize) -> Matrix {
        let f = &self.followers[i];
        &(&self.leader_sample - &f.offset) - &(&f.expm_atk * &f.x_at_tk)
    }

    /// Minimum energy needed by follower `i` this epoch.
    pub fn oracle_energy(&self, i: usize) -> f64 {
        let eta = self.steering_residual(i);
        let f = &self.followers[i];
        (&eta.transpose() * &(&f.g_inv * &eta)).get(0, 0).max(0.0)
    }

    fn in_deadzone(&self, t: f64) -> bool {
        t - self.t_start <= self.policy.deadzone_steps as f64 * self.grid_step + 1e-12
    }

    fn apply_time_factor(&self, i: usize, t: f64, vec: &Matrix) -> Result<Matrix> {
        let f = &self.followers[i];
        let (_, phi) = f.propagator.propagate(t)?;
        Ok(&f.b_t * &(&phi * vec))
    }
}

/// Standalone evaluation of the minimum-energy steering law at local epoch
/// time `t_local` in `[0, horizon]`:
/// `u = B' e^{A'(horizon - t_local)} G^{-1} eta` with `G` the horizon
/// Gramian and `eta` the target minus the free drift. The arrival-time
/// designer and the brute-force oracles share this path with the epoch laws.
pub fn steering_input(
    a: &Matrix,
    b: &Matrix,
    g: &Matrix,
    eta: &Matrix,
    horizon: f64,
    t_local: f64,
) -> Result<Matrix> {
    let w = matrix::solve(g, eta, 1e12)?;
    let phi = matrix::expm(&a.transpose(), horizon - t_local)?;
    Ok(&b.transpose() * &(&phi * &w))
}

/// Neighbor packet: the kernel-weighted progress signal and the sender's
/// frozen drift target.
#[derive(Debug, Clone)]
pub struct NeighborPacket {
    pub sender: usize,
    pub z: Matrix,
    pub drift_target: Matrix,
}

/// Packets produced during one grid instant, indexed by sender.
#[derive(Debug, Clone, Default)]
pub struct PacketSet {
    slots: Vec<Option<NeighborPacket>>,
}

impl PacketSet {
    pub fn new(n: usize) -> PacketSet {
        PacketSet {
            slots: vec![None; n],
        }
    }

    pub fn insert(&mut self, p: NeighborPacket) {
        let i = p.sender;
        self.slots[i] = Some(p);
    }

    pub fn get(&self, sender: usize) -> Option<&NeighborPacket> {
        self.slots.get(sender).and_then(|s| s.as_ref())
    }
}

/// Minimum-energy law of a follower with leader access:
/// `u = B' e^{A'(t_{k+1}-t)} G_k^{-1} (x0(t_k) - F_i0 - e^{A T_k} x(t_k))`
/// for `t` in `(t_k, t_{k+1}]`; at `t_k` this evaluates the right limit.
pub fn direct_law(ctx: &EpochContext, i: usize, t: f64) -> Result<Matrix> {
    let f = &ctx.followers[i];
    let w = &f.g_inv * &ctx.steering_residual(i);
    ctx.apply_time_factor(i, t, &w)
}

/// Distributed law: the leader term weighted by `w_l` plus, per observed
/// neighbor, the packet progress term and the drift/offset correction term,
/// each weighted by `w_f`. Reduces to [`direct_law`] for followers that
/// observe only the leader.
pub fn distributed_law(
    ctx: &EpochContext,
    net: &LeaderNetwork,
    i: usize,
    packets: &PacketSet,
    t: f64,
) -> Result<Matrix> {
    let f = &ctx.followers[i];
    let n = f.x_at_tk.rows();
    let (w_l, w_f) = net.weights(i)?;
    let mut bracket = Matrix::zeros(n, 1);
    if net.indicator(i) == 1 {
        bracket = &bracket + &ctx.steering_residual(i).scale(w_l);
    }
    let drift_i = &f.expm_atk * &f.x_at_tk;
    for j in net.out_neighbors(i) {
        let p = packets.get(j).ok_or(Error::MissingPacket {
            sender: j,
            receiver: i,
        })?;
        let f_ij = &ctx.followers[i].offset - &ctx.followers[j].offset;
        let term = &(&(&p.z + &p.drift_target) - &drift_i) - &f_ij;
        bracket = &bracket + &term.scale(w_f);
    }
    let w = &f.g_inv * &bracket;
    ctx.apply_time_factor(i, t, &w)
}

/// Builds the packet follower `j` sends at grid time `t`, given its current
/// law-level state. `prior` must already hold the packets of `j`'s own
/// out-neighbors (the hierarchy levels give a valid order).
///
/// Past the deadzone the progress signal comes from the kernel solve; inside
/// it, or when the solve would amplify roundoff beyond the policy cap, the
/// packet carries the reconstructed limit value instead. With a widened
/// kernel (`delta_fraction` set) the solve is used throughout.
pub fn make_packet(
    ctx: &EpochContext,
    net: &LeaderNetwork,
    j: usize,
    x_j_t: &Matrix,
    t: f64,
    prior: &PacketSet,
) -> Result<NeighborPacket> {
    let f = &ctx.followers[j];
    let drift_target = &f.expm_atk * &f.x_at_tk;
    let widened = f.propagator.lead_in() > 0.0;
    let at_start = f.propagator.grid_index(t)? == 0;

    if widened {
        // Bounded kernel inverse by construction; no reconstruction needed.
        let d = x_j_t - &(&f.propagator.drift_factor(t)? * &f.x_at_tk);
        let p = f.propagator.pmatrix(t)?;
        let z = &f.g_k * &(&p * &d);
        return Ok(NeighborPacket { sender: j, z, drift_target });
    }

    let mut z = None;
    if !ctx.in_deadzone(t) && !at_start {
        match f.propagator.pmatrix(t) {
            Ok(p) => {
                if f.g_norm_one * p.norm_one() <= ctx.policy.packet_amp_cap {
                    let d = x_j_t - &(&f.propagator.drift_factor(t)? * &f.x_at_tk);
                    z = Some(&f.g_k * &(&p * &d));
                }
            }
            Err(Error::Singular { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let z = match z {
        Some(z) => z,
        None => reconstruct_limit(ctx, net, j, &drift_target, prior)?,
    };
    Ok(NeighborPacket { sender: j, z, drift_target })
}

/// Limit value of the progress signal at the epoch start: the sender's own
/// steering bracket, assembled from the leader term and its incoming
/// packets. Equals the steering residual along exact trajectories.
fn reconstruct_limit(
    ctx: &EpochContext,
    net: &LeaderNetwork,
    j: usize,
    drift_j: &Matrix,
    prior: &PacketSet,
) -> Result<Matrix> {
    let n = drift_j.rows();
    let (w_l, w_f) = net.weights(j)?;
    let mut acc = Matrix::zeros(n, 1);
    if net.indicator(j) == 1 {
        acc = &acc + &ctx.steering_residual(j).scale(w_l);
    }
    for m in net.out_neighbors(j) {
        let p = prior.get(m).ok_or(Error::MissingPacket {
            sender: m,
            receiver: j,
        })?;
        let f_jm = &ctx.followers[j].offset - &ctx.followers[m].offset;
        let term = &(&(&p.z + &p.drift_target) - drift_j) - &f_jm;
        acc = &acc + &term.scale(w_f);
    }
    Ok(acc)
}

/// Per-follower gains that render a heterogeneous group homogeneous:
/// `u_i = K_i x_i + W_i v_i` gives every follower the shared dynamics
/// `(A, B)`.
#[derive(Debug, Clone)]
pub struct HomogenizationGains {
    pub k: Vec<Matrix>,
    pub w: Vec<Matrix>,
    pub target_a: Matrix,
    pub target_b: Matrix,
}

/// Computes `K_i = B_i'(B_i B_i')^{-1}(A - A_i)` and
/// `W_i = B_i'(B_i B_i')^{-1} B` for every follower. Requires each `B_i`
/// full row rank and `(A, B)` controllable.
pub fn homogenize(
    systems: &[(Matrix, Matrix)],
    target_a: &Matrix,
    target_b: &Matrix,
) -> Result<HomogenizationGains> {
    if !gramian::is_controllable(target_a, target_b)? {
        return Err(Error::NotControllable { follower: 0 });
    }
    let mut ks = Vec::with_capacity(systems.len());
    let mut ws = Vec::with_capacity(systems.len());
    for (i, (a, b)) in systems.iter().enumerate() {
        let n = a.rows();
        if matrix::rank(b, 0.0)? != n {
            return Err(Error::RankDeficient {
                follower: i,
                what: format!("B must have full row rank {n} for homogenization"),
            });
        }
        let bbt = b * &b.transpose();
        let pinv = matrix::solve(&bbt, b, 1e12)?.transpose(); // B'(BB')^{-1}
        let k = &pinv * &(target_a - a);
        let w = &pinv * target_b;
        let a_residual = (&(a + &(b * &k)) - target_a).norm_fro();
        let b_residual = (&(b * &w) - target_b).norm_fro();
        let scale = 1.0 + target_a.norm_fro() + target_b.norm_fro();
        if a_residual > 1e-10 * scale || b_residual > 1e-10 * scale {
            return Err(Error::RankDeficient {
                follower: i,
                what: format!(
                    "homogenization residuals {a_residual:.3e}/{b_residual:.3e} exceed tolerance"
                ),
            });
        }
        ks.push(k);
        ws.push(w);
    }
    Ok(HomogenizationGains {
        k: ks,
        w: ws,
        target_a: target_a.clone(),
        target_b: target_b.clone(),
    })
}

/// Output-channel transform for output tracking: with `C B` full row rank,
/// `u = B'C'(C B B'C')^{-1} (v - C A x)` renders the output dynamics
/// `ydot = v`.
#[derive(Debug, Clone)]
pub struct OutputChannel {
    gain: Matrix,
    ca: Matrix,
}

impl OutputChannel {
    pub fn new(follower_id: usize, a: &Matrix, b: &Matrix, c: &Matrix) -> Result<OutputChannel> {
        let p = c.rows();
        let cb = c * b;
        if matrix::rank(&cb, 0.0)? != p {
            return Err(Error::RankDeficient {
                follower: follower_id,
                what: format!("C B must have full row rank {p} for output tracking"),
            });
        }
        let m = &cb * &cb.transpose();
        let m_inv = matrix::solve(&m, &Matrix::identity(p), 1e12)?;
        Ok(OutputChannel {
            gain: &cb.transpose() * &m_inv,
            ca: c * a,
        })
    }

    /// Physical input realizing the requested output rate `v` at state `x`.
    pub fn control(&self, v: &Matrix, x: &Matrix) -> Matrix {
        &self.gain * &(v - &(&self.ca * x))
    }
}

/// One-shot form of the output transform.
pub fn output_transform(
    follower_id: usize,
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    v: &Matrix,
    x: &Matrix,
) -> Result<Matrix> {
    Ok(OutputChannel::new(follower_id, a, b, c)?.control(v, x))
}
