//! Agent models: heterogeneous LTI followers, the leader as an exogenous
//! sampled signal, and the sampling schedule.
//!
//! The leader may be a waypoint table, an LTI system, or an arbitrary
//! right-hand side. Followers never see more than the sampled value at the
//! scheduled instants: the signal's state and dynamics stay private and the
//! only follower-facing accessor is [`LeaderSignal::sample`].

use crate::error::{Error, Result};
use crate::gramian;
use crate::matrix::Matrix;

/// One follower's model: `xdot = A x + B u`, optionally an output map used
/// in output-tracking scenarios and per-channel input bounds used by the
/// saturation reporting.
#[derive(Debug, Clone)]
pub struct LtiFollower {
    pub id: usize,
    pub a: Matrix,
    pub b: Matrix,
    pub x0: Matrix,
    pub c: Option<Matrix>,
    pub u_bounds: Option<Vec<(f64, f64)>>,
}

impl LtiFollower {
    pub fn new(
        id: usize,
        a: Matrix,
        b: Matrix,
        x0: Matrix,
        c: Option<Matrix>,
        u_bounds: Option<Vec<(f64, f64)>>,
    ) -> Result<LtiFollower> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("follower {id}: A must be square")));
        }
        let n = a.rows();
        if b.rows() != n {
            return Err(Error::Dimension(format!(
                "follower {id}: B must have {n} rows"
            )));
        }
        if x0.rows() != n || x0.cols() != 1 {
            return Err(Error::Dimension(format!(
                "follower {id}: x0 must be an {n}-vector"
            )));
        }
        if let Some(c) = &c {
            if c.cols() != n {
                return Err(Error::Dimension(format!(
                    "follower {id}: C must have {n} columns"
                )));
            }
        }
        if let Some(bounds) = &u_bounds {
            if bounds.len() != b.cols() {
                return Err(Error::Dimension(format!(
                    "follower {id}: need one input bound pair per input channel"
                )));
            }
            for &(lo, hi) in bounds {
                if lo >= hi {
                    return Err(Error::Domain(format!(
                        "follower {id}: empty input bound interval [{lo}, {hi}]"
                    )));
                }
            }
        }
        if !gramian::is_controllable(&a, &b)? {
            return Err(Error::NotControllable { follower: id });
        }
        Ok(LtiFollower { id, a, b, x0, c, u_bounds })
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.c.as_ref().map(|c| c.rows())
    }
}

/// Leader input as a function of time.
pub type InputFn = Box<dyn Fn(f64) -> Matrix>;

/// Right-hand side `f(x, u, t)` of a nonlinear leader.
pub type RhsFn = Box<dyn Fn(&Matrix, &Matrix, f64) -> Matrix>;

enum LeaderKind {
    /// Tabulated samples `(t_k, value)`.
    Waypoints(Vec<(f64, Matrix)>),
    Lti { a: Matrix, b: Matrix, input: InputFn },
    Nonlinear { rhs: RhsFn, input: InputFn },
}

/// Source of the sampled leader values. Dynamic variants carry integration
/// state advanced on the same fixed grid as the followers; single writer.
pub struct LeaderSignal {
    kind: LeaderKind,
    state: Matrix,
    time: f64,
    output: Option<Matrix>,
}

fn zero_input(dim: usize) -> InputFn {
    Box::new(move |_t| Matrix::zeros(dim.max(1), 1))
}

impl LeaderSignal {
    pub fn waypoints(table: Vec<(f64, Matrix)>) -> Result<LeaderSignal> {
        if table.is_empty() {
            return Err(Error::Domain("waypoint table must not be empty".into()));
        }
        let dim = table[0].1.rows();
        if table.iter().any(|(_, v)| v.rows() != dim || v.cols() != 1) {
            return Err(Error::Dimension("waypoint values must share one dimension".into()));
        }
        Ok(LeaderSignal {
            state: table[0].1.clone(),
            kind: LeaderKind::Waypoints(table),
            time: 0.0,
            output: None,
        })
    }

    pub fn lti(a: Matrix, b: Matrix, x0: Matrix, input: Option<InputFn>) -> Result<LeaderSignal> {
        if !a.is_square() || a.rows() != x0.rows() || b.rows() != a.rows() {
            return Err(Error::Dimension("leader system dimensions disagree".into()));
        }
        let input = input.unwrap_or_else(|| zero_input(b.cols()));
        Ok(LeaderSignal {
            state: x0,
            kind: LeaderKind::Lti { a, b, input },
            time: 0.0,
            output: None,
        })
    }

    pub fn nonlinear(rhs: RhsFn, x0: Matrix, input: Option<InputFn>) -> Result<LeaderSignal> {
        let input = input.unwrap_or_else(|| zero_input(1));
        Ok(LeaderSignal {
            state: x0,
            kind: LeaderKind::Nonlinear { rhs, input },
            time: 0.0,
            output: None,
        })
    }

    /// Mass-spring-damper with a cubic stiffness term:
    /// `m xddot + b xdot + k x + c3 x^3 = u`.
    pub fn cubic_msd(
        k: f64,
        b: f64,
        m: f64,
        c3: f64,
        x0: Matrix,
        input: Option<InputFn>,
    ) -> Result<LeaderSignal> {
        if m == 0.0 {
            return Err(Error::Domain("mass must be nonzero".into()));
        }
        let rhs: RhsFn = Box::new(move |x, u, _t| {
            let p = x.get(0, 0);
            let v = x.get(1, 0);
            let f = u.get(0, 0);
            Matrix::column(&[v, (f - b * v - k * p - c3 * p.powi(3)) / m]).unwrap()
        });
        LeaderSignal::nonlinear(rhs, x0, input)
    }

    /// Restrict the sampled value to an output map applied to the state.
    pub fn with_output(mut self, c: Matrix) -> Result<LeaderSignal> {
        if c.cols() != self.state.rows() {
            return Err(Error::Dimension("leader output map has wrong column count".into()));
        }
        self.output = Some(c);
        Ok(self)
    }

    /// Dimension of the sampled value.
    pub fn sample_dim(&self) -> usize {
        match (&self.kind, &self.output) {
            (LeaderKind::Waypoints(t), _) => t[0].1.rows(),
            (_, Some(c)) => c.rows(),
            (_, None) => self.state.rows(),
        }
    }

    /// The sampled value at a scheduled instant. For dynamic leaders the
    /// signal must have been advanced to `t_k` first.
    pub fn sample(&self, t_k: f64) -> Result<Matrix> {
        match &self.kind {
            LeaderKind::Waypoints(table) => table
                .iter()
                .find(|(t, _)| (t - t_k).abs() <= 1e-9 * (1.0 + t_k.abs()))
                .map(|(_, v)| v.clone())
                .ok_or(Error::Schedule(t_k)),
            _ => {
                if (self.time - t_k).abs() > 1e-9 * (1.0 + t_k.abs()) {
                    return Err(Error::Schedule(t_k));
                }
                Ok(match &self.output {
                    Some(c) => c * &self.state,
                    None => self.state.clone(),
                })
            }
        }
    }

    /// Advance a dynamic leader from `from` to `to` with `steps` RK4 steps
    /// (the followers' grid). No-op for tabulated leaders.
    pub fn advance(&mut self, from: f64, to: f64, steps: usize) -> Result<()> {
        if to <= from {
            return Err(Error::Domain(format!("cannot advance from {from} to {to}")));
        }
        if let LeaderKind::Waypoints(_) = self.kind {
            self.time = to;
            return Ok(());
        }
        if (self.time - from).abs() > 1e-9 * (1.0 + from.abs()) {
            return Err(Error::Domain(format!(
                "leader is at t = {} but advance starts at {from}",
                self.time
            )));
        }
        let h = (to - from) / steps as f64;
        let deriv = |x: &Matrix, t: f64| -> Matrix {
            match &self.kind {
                LeaderKind::Lti { a, b, input } => &(a * x) + &(b * &input(t)),
                LeaderKind::Nonlinear { rhs, input } => rhs(x, &input(t), t),
                LeaderKind::Waypoints(_) => unreachable!(),
            }
        };
        let mut x = self.state.clone();
        for s in 0..steps {
            let t = from + s as f64 * h;
            let k1 = deriv(&x, t);
            let k2 = deriv(&(&x + &k1.scale(h / 2.0)), t + h / 2.0);
            let k3 = deriv(&(&x + &k2.scale(h / 2.0)), t + h / 2.0);
            let k4 = deriv(&(&x + &k3.scale(h)), t + h);
            x = &x + &(&(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4).scale(h / 6.0);
        }
        self.state = x;
        self.time = to;
        Ok(())
    }
}

/// Strictly increasing sampling instants starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule {
    times: Vec<f64>,
}

impl SamplingSchedule {
    pub fn new(times: Vec<f64>) -> Result<SamplingSchedule> {
        if times.is_empty() {
            return Err(Error::Domain("schedule must contain at least t0".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Domain(format!(
                "schedule must start at t0 = 0, got {}",
                times[0]
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("schedule times must be strictly increasing".into()));
        }
        Ok(SamplingSchedule { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn epoch_count(&self) -> usize {
        self.times.len() - 1
    }

    pub fn epoch(&self, k: usize) -> (f64, f64) {
        (self.times[k], self.times[k + 1])
    }
}
