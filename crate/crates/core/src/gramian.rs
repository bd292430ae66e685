//! Controllability machinery: the finite-horizon Gramian, the mixed epoch
//! kernel and its inverse gain, their propagation by fixed-step integration
//! of the associated matrix differential equations, and the minimum-energy
//! value of a point-to-point transfer.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};

/// Kalman controllability matrix `[B, AB, ..., A^{n-1}B]`.
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension("A must be square".into()));
    }
    if a.rows() != b.rows() {
        return Err(Error::Dimension("A and B must have the same row count".into()));
    }
    let n = a.rows();
    let m = b.cols();
    let mut block = b.clone();
    let mut k = DMatrix::zeros(n, n * m);
    for p in 0..n {
        k.view_mut((0, p * m), (n, m)).copy_from(block.inner());
        block = a * &block;
    }
    Ok(Matrix::from_inner(k))
}

/// True iff `[B, AB, ..., A^{n-1}B]` has full row rank.
pub fn is_controllable(a: &Matrix, b: &Matrix) -> Result<bool> {
    let k = controllability_matrix(a, b)?;
    Ok(matrix::rank(&k, 0.0)? == a.rows())
}

/// Controllability Gramian over a horizон of length `t`:
/// `G(t) = int_0^t e^{A(t-s)} B B' e^{A'(t-s)} ds`.
///
/// Computed from one block matrix exponential: with
/// `M = [[A, BB'], [0, -A']]`, the upper-right block `H` of `e^{Mt}`
/// satisfies `G(t) = H e^{A't}`. The result is symmetrized.
pub fn gramian(a: &Matrix, b: &Matrix, t: f64) -> Result<Matrix> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("gramian horizon must be positive, got {t}")));
    }
    if !is_controllable(a, b)? {
        return Err(Error::NotControllable { follower: 0 });
    }
    gramian_unchecked(a, b, t)
}

pub(crate) fn gramian_unchecked(a: &Matrix, b: &Matrix, t: f64) -> Result<Matrix> {
    let n = a.rows();
    let bbt = b * &b.transpose();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(a.inner());
    block.view_mut((0, n), (n, n)).copy_from(bbt.inner());
    block
        .view_mut((n, n), (n, n))
        .copy_from(&(-a.inner().transpose()));
    let e = matrix::expm(&Matrix::from_inner(block), t)?;
    let h = Matrix::from_inner(e.inner().view((0, n), (n, n)).into_owned());
    let eat_t = matrix::expm(&a.transpose(), t)?;
    let g = &h * &eat_t;
    let sym = Matrix::from_inner((g.inner() + g.inner().transpose()) * 0.5);
    Ok(sym)
}

/// Minimum energy `int u'u` of the control transferring `(A, B)` from
/// `x_start` to `x_target` in time `t`: the value `eta' G(t)^-1 eta` with
/// `eta = x_target - e^{At} x_start`.
pub fn min_energy(
    a: &Matrix,
    b: &Matrix,
    t: f64,
    x_start: &Matrix,
    x_target: &Matrix,
) -> Result<f64> {
    let g = gramian(a, b, t)?;
    let eta = x_target - &(&matrix::expm(a, t)? * x_start);
    let w = matrix::solve(&g, &eta, NumericDefaults::COND_CAP)?;
    let v = (&eta.transpose() * &w).get(0, 0);
    Ok(v.max(0.0))
}

struct NumericDefaults;
impl NumericDefaults {
    const COND_CAP: f64 = 1e12;
}

/// Per-epoch kernel state of one agent: the running Gramian `W(t)` with
/// `W(t_k) = 0`, the transition factor `Phi(t) = e^{A'(t_{k+1}-t)}` and the
/// forward drift factor `e^{A(t-t_k)}`, all tabulated on a fixed grid by
/// classical RK4 so that epoch-boundary and stage times are exact grid
/// points. One propagator per (agent, epoch); single writer.
#[derive(Debug, Clone)]
pub struct GramianPropagator {
    a: Matrix,
    b: Matrix,
    t_start: f64,
    t_end: f64,
    step: f64,
    /// Positive when the kernel is widened to start ahead of the epoch, which
    /// bounds the inverse gain at the epoch start at the cost of a small
    /// arrival bias.
    lead_in: f64,
    w: Vec<Matrix>,
    phi: Vec<Matrix>,
    drift: Vec<Matrix>,
    g_end: Matrix,
}

impl GramianPropagator {
    /// Integrates the kernel equations over `[t_start - lead_in, t_end]` and
    /// tabulates values on `substeps + 1` grid points across the epoch.
    pub fn new(
        a: &Matrix,
        b: &Matrix,
        t_start: f64,
        t_end: f64,
        substeps: usize,
        lead_in: f64,
    ) -> Result<GramianPropagator> {
        if t_end <= t_start {
            return Err(Error::Domain(format!(
                "epoch must have positive length, got [{t_start}, {t_end}]"
            )));
        }
        if substeps == 0 {
            return Err(Error::Domain("substeps must be positive".into()));
        }
        if lead_in < 0.0 {
            return Err(Error::Domain("lead-in must be nonnegative".into()));
        }
        let n = a.rows();
        let horizon = t_end - t_start;
        let step = horizon / substeps as f64;
        let bbt = (b * &b.transpose()).inner().clone();
        let at = a.inner().transpose();
        let ai = a.inner().clone();

        let mut w = DMatrix::<f64>::zeros(n, n);
        // Phi(t) = e^{A'(t_end - t)} integrated alongside W.
        let mut phi = matrix::expm(&a.transpose(), horizon + lead_in)?.inner().clone();
        let mut psi: DMatrix<f64> = DMatrix::identity(n, n);

        let dw = |w: &DMatrix<f64>| &ai * w + w * &at + &bbt;
        let dphi = |p: &DMatrix<f64>| -(&at * p);
        let dpsi = |s: &DMatrix<f64>| &ai * s;
        let rk4 = |m: &mut DMatrix<f64>, f: &dyn Fn(&DMatrix<f64>) -> DMatrix<f64>, h: f64| {
            let k1 = f(m);
            let k2 = f(&(&*m + &k1 * (h / 2.0)));
            let k3 = f(&(&*m + &k2 * (h / 2.0)));
            let k4 = f(&(&*m + &k3 * h));
            *m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        };

        // Lead-in segment, not tabulated: advances W and Phi up to t_start.
        if lead_in > 0.0 {
            let pre = (lead_in / step).ceil().max(1.0) as usize;
            let hpre = lead_in / pre as f64;
            for _ in 0..pre {
                rk4(&mut w, &dw, hpre);
                rk4(&mut phi, &dphi, hpre);
            }
        }

        let mut wt = Vec::with_capacity(substeps + 1);
        let mut pt = Vec::with_capacity(substeps + 1);
        let mut st = Vec::with_capacity(substeps + 1);
        wt.push(Matrix::from_inner(w.clone()));
        pt.push(Matrix::from_inner(phi.clone()));
        st.push(Matrix::from_inner(psi.clone()));
        for _ in 0..substeps {
            rk4(&mut w, &dw, step);
            rk4(&mut phi, &dphi, step);
            rk4(&mut psi, &dpsi, step);
            wt.push(Matrix::from_inner(w.clone()));
            pt.push(Matrix::from_inner(phi.clone()));
            st.push(Matrix::from_inner(psi.clone()));
        }
        let g_end = gramian_unchecked(a, b, horizon + lead_in)?;
        Ok(GramianPropagator {
            a: a.clone(),
            b: b.clone(),
            t_start,
            t_end,
            step,
            lead_in,
            w: wt,
            phi: pt,
            drift: st,
            g_end,
        })
    }

    pub fn epoch(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lead_in(&self) -> f64 {
        self.lead_in
    }

    pub fn system(&self) -> (&Matrix, &Matrix) {
        (&self.a, &self.b)
    }

    /// Index of a query time on the tabulated grid; query times must lie on
    /// the grid exactly (up to roundoff).
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        if t < self.t_start - 1e-9 || t > self.t_end + 1e-9 {
            return Err(Error::Domain(format!(
                "time {t} outside epoch [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        let raw = (t - self.t_start) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "time {t} is not on the integration grid (step {})",
                self.step
            )));
        }
        Ok(idx as usize)
    }

    /// `(W(t), Phi(t))` at a grid time.
    pub fn propagate(&self, t: f64) -> Result<(Matrix, Matrix)> {
        let i = self.grid_index(t)?;
        Ok((self.w[i].clone(), self.phi[i].clone()))
    }

    /// Mixed kernel `Gbar(t) = W(t) Phi(t)`; invertible strictly inside the
    /// epoch and equal to the epoch Gramian at its end.
    pub fn gbar(&self, t: f64) -> Result<Matrix> {
        let i = self.grid_index(t)?;
        Ok(&self.w[i] * &self.phi[i])
    }

    /// Inverse gain of the mixed kernel: exactly zero at the epoch start
    /// (unless a lead-in widens the kernel), `Gbar(t)^-1` afterwards.
    pub fn pmatrix(&self, t: f64) -> Result<Matrix> {
        let i = self.grid_index(t)?;
        if i == 0 && self.lead_in == 0.0 {
            let n = self.a.rows();
            return Ok(Matrix::zeros(n, n));
        }
        let gbar = &self.w[i] * &self.phi[i];
        matrix::solve(&gbar, &Matrix::identity(self.a.rows()), NumericDefaults::COND_CAP)
    }

    /// Forward drift factor `e^{A (t - t_start)}` at a grid time.
    pub fn drift_factor(&self, t: f64) -> Result<Matrix> {
        let i = self.grid_index(t)?;
        Ok(self.drift[i].clone())
    }

    /// Gramian of the (possibly widened) kernel horizon, from the closed
    /// form rather than the tabulated endpoint.
    pub fn epoch_gramian(&self) -> &Matrix {
        &self.g_end
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_integrator() -> (Matrix, Matrix) {
        (
            Matrix::from_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
            Matrix::from_rows(2, 1, &[0.0, 1.0]).unwrap(),
        )
    }

    fn di_gramian(t: f64) -> Matrix {
        Matrix::from_rows(
            2,
            2,
            &[t.powi(3) / 3.0, t * t / 2.0, t * t / 2.0, t],
        )
        .unwrap()
    }

    #[test]
    fn gramian_of_zero_dynamics_full_input() {
        let a = Matrix::zeros(3, 3);
        let b = Matrix::identity(3);
        for t in [0.25, 1.0, 4.0] {
            let g = gramian(&a, &b, t).unwrap();
            assert!((&g - &Matrix::identity(3).scale(t)).norm_fro() < 1e-10 * (1.0 + t));
        }
    }

    #[test]
    fn gramian_double_integrator_closed_form() {
        let (a, b) = double_integrator();
        for t in [0.5, 1.0, 2.0, 18.49] {
            let g = gramian(&a, &b, t).unwrap();
            let want = di_gramian(t);
            assert!(
                (&g - &want).norm_fro() <= 1e-10 * want.norm_fro(),
                "t={t}: {:?}",
                g.to_row_major()
            );
        }
    }

    #[test]
    fn gramian_vanishes_as_horizon_shrinks() {
        let (a, b) = double_integrator();
        let g = gramian(&a, &b, 1e-6).unwrap();
        assert!(g.norm_fro() < 1e-5);
        let ev = g.symmetric_eigenvalues().unwrap();
        assert!(ev[0].abs() < 1e-6);
    }

    #[test]
    fn gramian_rejects_bad_inputs() {
        let (a, b) = double_integrator();
        assert!(matches!(gramian(&a, &b, 0.0), Err(Error::Domain(_))));
        let b_bad = Matrix::from_rows(2, 1, &[1.0, 0.0]).unwrap();
        let a_id = Matrix::identity(2);
        assert!(matches!(
            gramian(&a_id, &b_bad, 1.0),
            Err(Error::NotControllable { .. })
        ));
    }

    #[test]
    fn controllability_examples() {
        let (a, b) = double_integrator();
        assert!(is_controllable(&a, &b).unwrap());
        let a_id = Matrix::identity(2);
        let b1 = Matrix::from_rows(2, 1, &[1.0, 0.0]).unwrap();
        assert!(!is_controllable(&a_id, &b1).unwrap());
        // Short-period aircraft pair.
        let a_ac = Matrix::from_rows(2, 2, &[-0.0115, 1.0, -0.0395, -2.9857]).unwrap();
        let b_ac = Matrix::from_rows(2, 1, &[-0.1601, -11.0437]).unwrap();
        assert!(is_controllable(&a_ac, &b_ac).unwrap());
    }

    #[test]
    fn propagate_initial_and_final_conditions() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 1000, 0.0).unwrap();
        let (w0, phi0) = p.propagate(0.0).unwrap();
        assert_eq!(w0.norm_fro(), 0.0);
        let want_phi0 = matrix::expm(&a.transpose(), 1.0).unwrap();
        assert!((&phi0 - &want_phi0).norm_fro() < 1e-10);
        let (w1, phi1) = p.propagate(1.0).unwrap();
        assert!((&w1 - &di_gramian(1.0)).norm_fro() < 1e-10);
        assert!((&phi1 - &Matrix::identity(2)).norm_fro() < 1e-10);
    }

    #[test]
    fn propagate_interior_closed_form() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 1000, 0.0).unwrap();
        let (w, _) = p.propagate(0.5).unwrap();
        let want = Matrix::from_rows(2, 2, &[1.0 / 24.0, 1.0 / 8.0, 1.0 / 8.0, 0.5]).unwrap();
        assert!((&w - &want).norm_fro() < 1e-10);
    }

    #[test]
    fn gbar_endpoints() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 1000, 0.0).unwrap();
        assert!(p.gbar(0.0).unwrap().norm_fro() < 1e-12);
        assert!((&p.gbar(1.0).unwrap() - &di_gramian(1.0)).norm_fro() < 1e-10);
        // Gbar(0.5) = G(0.5) e^{A' 0.5}
        let want = &di_gramian(0.5) * &matrix::expm(&a.transpose(), 0.5).unwrap();
        assert!((&p.gbar(0.5).unwrap() - &want).norm_fro() < 1e-10);
    }

    #[test]
    fn pmatrix_cases() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 1000, 0.0).unwrap();
        assert_eq!(p.pmatrix(0.0).unwrap().norm_fro(), 0.0);
        let want = Matrix::from_rows(2, 2, &[12.0, -6.0, -6.0, 4.0]).unwrap();
        assert!((&p.pmatrix(1.0).unwrap() - &want).norm_fro() < 1e-8);
    }

    #[test]
    fn pmatrix_nonzero_at_start_with_lead_in() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 1000, 0.01).unwrap();
        let p0 = p.pmatrix(0.0).unwrap();
        assert!(p0.norm_fro() > 0.0 && p0.norm_fro().is_finite());
    }

    #[test]
    fn off_grid_and_out_of_epoch_queries_fail() {
        let (a, b) = double_integrator();
        let p = GramianPropagator::new(&a, &b, 0.0, 1.0, 10, 0.0).unwrap();
        assert!(matches!(p.propagate(0.05 + 0.013), Err(Error::Domain(_))));
        assert!(matches!(p.propagate(1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn min_energy_examples() {
        let (a, b) = double_integrator();
        let origin = Matrix::column(&[0.0, 0.0]).unwrap();
        let unit = Matrix::column(&[1.0, 0.0]).unwrap();
        // Free drift needs no control.
        let x0 = Matrix::column(&[0.3, -0.7]).unwrap();
        let drifted = &matrix::expm(&a, 1.0).unwrap() * &x0;
        assert!(min_energy(&a, &b, 1.0, &x0, &drifted).unwrap() < 1e-9);
        let e1 = min_energy(&a, &b, 1.0, &origin, &unit).unwrap();
        assert!((e1 - 12.0).abs() < 1e-8 * 12.0);
        let e2 = min_energy(&a, &b, 2.0, &origin, &unit).unwrap();
        assert!((e2 - 1.5).abs() < 1e-8 * 1.5);
    }
}
