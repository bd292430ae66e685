//! Dense real linear algebra: the numeric substrate for the state-space and
//! Gramian computations. Matrices are small (states of the agents in scope
//! have dimension well below ten), so everything is dense `f64` backed by
//! nalgebra with finiteness enforced at the boundaries.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Central record of the numeric tolerances and integration defaults. Tests
/// and the acceptance suite reference these values rather than re-stating
/// their own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Condition-estimate cap above which a linear solve is reported singular.
    pub cond_cap: f64,
    /// Relative tolerance on the residual of a linear solve.
    pub solve_residual_tol: f64,
    /// Amplification cap `|G_k|_1 * |Gbar(t)^-1|_1` above which a neighbor
    /// packet falls back to its reconstructed limit value instead of the
    /// near-singular solve.
    pub packet_amp_cap: f64,
    /// RK4 steps per sampling epoch for follower and leader integration.
    pub steps_per_epoch: usize,
    /// Grid steps after each sampling instant during which neighbor packets
    /// avoid the ill-conditioned kernel inversion.
    pub deadzone_steps: usize,
    /// Optional widened kernel interval: the gain kernel is computed over
    /// `(t_k - delta, t_{k+1}]` with `delta = delta_fraction * T_k`.
    pub delta_fraction: Option<f64>,
    /// Absolute bisection tolerance of the arrival-time designer, seconds.
    pub bisection_tol: f64,
    /// Smallest admissible epoch length, seconds.
    pub min_epoch: f64,
    /// Telescoped formation offsets from different paths must agree to this.
    pub offset_consistency_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            cond_cap: 1e12,
            solve_residual_tol: 1e-9,
            packet_amp_cap: 1e6,
            steps_per_epoch: 1000,
            deadzone_steps: 2,
            delta_fraction: None,
            bisection_tol: 1e-6,
            min_epoch: 1e-3,
            offset_consistency_tol: 1e-12,
        }
    }
}

/// Dense real matrix in row-major entry order. Column vectors are `n x 1`.
/// Every constructor and exported operation checks that all entries are
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    pub fn from_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Matrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let m = Matrix(DMatrix::from_row_slice(rows, cols, entries));
        m.check_finite("from_rows")?;
        Ok(m)
    }

    pub fn column(entries: &[f64]) -> Result<Matrix> {
        Matrix::from_rows(entries.len(), 1, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Column vector entries; errors are not possible, panics if not n x 1.
    pub fn as_vector(&self) -> Vec<f64> {
        assert_eq!(self.cols(), 1, "as_vector on a non-column matrix");
        self.0.as_slice().to_vec()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix(&self.0 * s)
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm()
    }

    /// Induced one norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.0.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn check_finite(&self, ctx: &str) -> Result<()> {
        if self.0.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(ctx.to_string()))
        }
    }

    pub(crate) fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub(crate) fn from_inner(m: DMatrix<f64>) -> Matrix {
        Matrix(m)
    }

    /// Symmetric eigenvalues, ascending. Used by tests asserting definiteness.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
        }
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ev)
    }
}

impl std::ops::Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        Matrix(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows(), self.cols()), (rhs.rows(), rhs.cols()));
        Matrix(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols(), rhs.rows(), "incompatible product dimensions");
        Matrix(&self.0 * &rhs.0)
    }
}

/// Matrix exponential `e^{A t}` by scaling and squaring with a high-order
/// Pade approximant.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain("expm time must be finite".into()));
    }
    let e = Matrix((&a.0 * t).exp());
    e.check_finite("expm")?;
    Ok(e)
}

/// Solve `A X = B` by pivoted LU. Fails with the one-norm condition estimate
/// attached when `A` is singular beyond `cond_cap`.
pub fn solve(a: &Matrix, b: &Matrix, cond_cap: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension("solve needs a square A".into()));
    }
    if a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "solve: A is {0}x{0} but B has {1} rows",
            a.rows(),
            b.rows()
        )));
    }
    let lu = a.0.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or(Error::Singular { cond: f64::INFINITY, cap: cond_cap })?;
    let cond = a.norm_one() * Matrix(inv.clone()).norm_one();
    if !cond.is_finite() || cond > cond_cap {
        return Err(Error::Singular { cond, cap: cond_cap });
    }
    let x = Matrix(&inv * &b.0);
    x.check_finite("solve")?;
    Ok(x)
}

/// One-norm condition estimate `|A|_1 |A^-1|_1`, infinite when not invertible.
pub fn cond_one(a: &Matrix) -> f64 {
    match a.0.clone().lu().try_inverse() {
        Some(inv) => a.norm_one() * Matrix(inv).norm_one(),
        None => f64::INFINITY,
    }
}

/// Numerical rank from singular values above `tol`; `tol = 0` selects the
/// usual default relative to the largest singular value.
pub fn rank(a: &Matrix, tol: f64) -> Result<usize> {
    if tol < 0.0 {
        return Err(Error::Domain("rank tolerance must be nonnegative".into()));
    }
    let sv = a.0.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let eff = if tol > 0.0 {
        tol
    } else {
        smax * (a.rows().max(a.cols()) as f64) * f64::EPSILON
    };
    Ok(sv.iter().filter(|&&s| s > eff).count())
}
