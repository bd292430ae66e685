//! Arrival-time design for double integrators under an input bound. Under
//! the minimum-energy law the input of a double integrator is affine in
//! time within an epoch, so its peak magnitude sits at one of the epoch's
//! endpoints; the smallest epoch length keeping that peak within the bound
//! is found by bracketing and bisection. Both endpoint bounds decrease as
//! the epoch grows, so a finite feasible length always exists.

use crate::controller;
use crate::error::{Error, Result};
use crate::gramian;
use crate::matrix::{self, Matrix, NumericPolicy};

/// Waypoints of a designed traversal with the epoch boundaries that keep
/// every follower's input within the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPlan {
    /// Position/velocity waypoints, in traversal order.
    pub waypoints: Vec<[f64; 2]>,
    pub u_max: f64,
    /// Cumulative arrival times, starting at zero: `times[l]` is the arrival
    /// instant at `waypoints[l - 1]`.
    pub times: Vec<f64>,
    /// The first-epoch arrival time each follower would need on its own; the
    /// plan's first epoch is their maximum.
    pub first_epoch_per_follower: Vec<f64>,
}

pub fn double_integrator() -> (Matrix, Matrix) {
    (
        Matrix::from_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
        Matrix::from_rows(2, 1, &[0.0, 1.0]).unwrap(),
    )
}

/// True for the fixed pair the designer covers.
pub fn is_double_integrator(a: &Matrix, b: &Matrix) -> bool {
    let (da, db) = double_integrator();
    a.rows() == 2 && a.cols() == 2 && b.rows() == 2 && b.cols() == 1 && {
        (&(a - &da)).norm_fro() == 0.0 && (&(b - &db)).norm_fro() == 0.0
    }
}

fn steering(x_start: &Matrix, x_end: &Matrix, horizon: f64, t_local: f64) -> Result<f64> {
    let (a, b) = double_integrator();
    let g = gramian::gramian(&a, &b, horizon)?;
    let eta = x_end - &(&matrix::expm(&a, horizon)? * x_start);
    Ok(controller::steering_input(&a, &b, &g, &eta, horizon, t_local)?.get(0, 0))
}

/// Input of the transfer law at the epoch's endpoints: the limit from the
/// right at the start, and the closing value. The peak of `|u|` over the
/// epoch is the larger of their magnitudes.
pub fn epoch_control_profile(
    x_start: &Matrix,
    x_end: &Matrix,
    horizon: f64,
) -> Result<(f64, f64)> {
    if horizon <= 0.0 || !horizon.is_finite() {
        return Err(Error::Domain(format!(
            "epoch length must be positive, got {horizon}"
        )));
    }
    Ok((
        steering(x_start, x_end, horizon, 0.0)?,
        steering(x_start, x_end, horizon, horizon)?,
    ))
}

/// Peak input magnitude of the transfer over the epoch.
pub fn peak_input(x_start: &Matrix, x_end: &Matrix, horizon: f64) -> Result<f64> {
    let (u0, u1) = epoch_control_profile(x_start, x_end, horizon)?;
    Ok(u0.abs().max(u1.abs()))
}

/// Smallest epoch length whose peak input stays within `u_max`, by doubling
/// an upper bracket from one second and bisecting to the policy tolerance.
/// The degenerate rest-to-same-rest transfer returns the minimum epoch
/// length (a zero-length epoch is inadmissible).
pub fn min_time_to(
    x_start: &Matrix,
    x_end: &Matrix,
    u_max: f64,
    policy: &NumericPolicy,
) -> Result<f64> {
    if u_max <= 0.0 {
        return Err(Error::Domain(format!("input bound must be positive, got {u_max}")));
    }
    let at_rest = (x_start - x_end).norm_fro() == 0.0 && x_start.get(1, 0) == 0.0;
    if at_rest {
        return Ok(policy.min_epoch);
    }
    if peak_input(x_start, x_end, policy.min_epoch)? <= u_max {
        return Ok(policy.min_epoch);
    }
    let mut hi = 1.0f64;
    while peak_input(x_start, x_end, hi)? > u_max {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(
                "no feasible epoch length below 1e12 seconds".into(),
            ));
        }
    }
    let mut lo = policy.min_epoch.min(hi / 2.0);
    while hi - lo > policy.bisection_tol {
        let mid = 0.5 * (lo + hi);
        if peak_input(x_start, x_end, mid)? <= u_max {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Designs the arrival times of a waypoint traversal: the first epoch is the
/// largest of the followers' own minimum times to the first waypoint; every
/// later epoch is the minimum time between consecutive waypoints (after the
/// first arrival the followers move as one).
pub fn design_plan(
    follower_initial_states: &[Matrix],
    waypoints: &[[f64; 2]],
    u_max: f64,
    policy: &NumericPolicy,
) -> Result<WaypointPlan> {
    if waypoints.is_empty() {
        return Err(Error::Domain("waypoint list must not be empty".into()));
    }
    if follower_initial_states.is_empty() {
        return Err(Error::Domain("need at least one follower initial state".into()));
    }
    let w1 = Matrix::column(&waypoints[0])?;
    let mut per_follower = Vec::with_capacity(follower_initial_states.len());
    for x0 in follower_initial_states {
        if x0.rows() != 2 || x0.cols() != 1 {
            return Err(Error::Dimension("initial states must be 2-vectors".into()));
        }
        per_follower.push(min_time_to(x0, &w1, u_max, policy)?);
    }
    let mut times = vec![0.0, per_follower.iter().cloned().fold(0.0, f64::max)];
    for pair in waypoints.windows(2) {
        let from = Matrix::column(&pair[0])?;
        let to = Matrix::column(&pair[1])?;
        let t = min_time_to(&from, &to, u_max, policy)?;
        times.push(times.last().unwrap() + t);
    }
    Ok(WaypointPlan {
        waypoints: waypoints.to_vec(),
        u_max,
        times,
        first_epoch_per_follower: per_follower,
    })
}
