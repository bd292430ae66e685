//! Shared test oracles: adaptive-quadrature Gramians (independent of the
//! library's block-exponential and ODE routes), random system generators,
//! and scalar quadrature for control-energy integrals.

#![allow(dead_code)]

use lfsim::matrix::{self, Matrix};
use rand::Rng;

/// Adaptive Simpson quadrature of a matrix-valued integrand. `tol` is
/// relative to the integral's overall magnitude (floored at one), so large
/// integrands do not chase an error target below roundoff.
pub fn simpson_matrix<F: Fn(f64) -> Matrix>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> Matrix {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let coarse = simpson_rule(a, b, &fa, &fm, &fb);
    let scale = 1.0 + coarse.norm_fro();
    simpson_rec(f, a, b, &fa, &fm, &fb, tol * scale, max_depth)
}

fn simpson_rule(a: f64, b: f64, fa: &Matrix, fm: &Matrix, fb: &Matrix) -> Matrix {
    (&(fa + &fm.scale(4.0)) + fb).scale((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> Matrix>(
    f: &F,
    a: f64,
    b: f64,
    fa: &Matrix,
    fm: &Matrix,
    fb: &Matrix,
    tol: f64,
    depth: usize,
) -> Matrix {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let whole = simpson_rule(a, b, fa, fm, fb);
    let left = simpson_rule(a, m, fa, &flm, fm);
    let right = simpson_rule(m, b, fm, &frm, fb);
    let refined = &left + &right;
    let err = (&refined - &whole).norm_fro();
    if depth == 0 || err <= 15.0 * tol {
        return refined;
    }
    let lhs = simpson_rec(f, a, m, fa, &flm, fm, tol / 2.0, depth - 1);
    let rhs = simpson_rec(f, m, b, fm, &frm, fb, tol / 2.0, depth - 1);
    &lhs + &rhs
}

/// Finite-horizon Gramian by adaptive Simpson on the defining integral,
/// default tolerance 1e-12. Deliberately shares nothing with the library's
/// computation routes.
pub fn quadrature_gramian(a: &Matrix, b: &Matrix, t: f64) -> Matrix {
    let bbt = b * &b.transpose();
    let integrand = |tau: f64| -> Matrix {
        let e = matrix::expm(a, t - tau).unwrap();
        &(&e * &bbt) * &e.transpose()
    };
    simpson_matrix(&integrand, 0.0, t, 1e-12, 24)
}

/// Scalar adaptive Simpson via the matrix machinery.
pub fn simpson_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let wrap = |t: f64| Matrix::from_rows(1, 1, &[f(t)]).unwrap();
    simpson_matrix(&wrap, a, b, tol, 24).get(0, 0)
}

/// Random matrix with entries uniform in [-1, 1].
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_rows(rows, cols, &data).unwrap()
}

/// Random Hurwitz-stable matrix with decay rates of order one: a scaled
/// random matrix shifted left of its Gershgorin bound.
pub fn random_stable<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut a = random_matrix(rng, n, n).scale(1.0 / n as f64);
    let radius = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    for i in 0..n {
        a.set(i, i, a.get(i, i) - radius - 0.2);
    }
    a
}

/// Random controllable pair with a stable `A`.
pub fn random_controllable<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Matrix, Matrix) {
    loop {
        let a = random_stable(rng, n);
        let b = random_matrix(rng, n, m);
        if lfsim::gramian::is_controllable(&a, &b).unwrap() {
            return (a, b);
        }
    }
}

/// Random leader-rooted DAG: nodes are ordered, every node links only to
/// strictly earlier nodes or the leader, and the first node always observes
/// the leader, so the sink hypothesis holds by construction.
pub fn random_sink_network<R: Rng>(
    rng: &mut R,
    n: usize,
) -> (lfsim::topology::LeaderNetwork, Vec<(usize, usize)>, Vec<usize>) {
    loop {
        let mut edges = Vec::new();
        let mut leader = Vec::new();
        for i in 0..n {
            // Each node picks at least one target among the leader and the
            // earlier nodes.
            let mut chosen = false;
            if i == 0 || rng.gen_bool(0.4) {
                leader.push(i);
                chosen = true;
            }
            for j in 0..i {
                if rng.gen_bool(0.35) {
                    edges.push((i, j));
                    chosen = true;
                }
            }
            if !chosen {
                let j = rng.gen_range(0..i);
                edges.push((i, j));
            }
        }
        if let Ok(net) = lfsim::topology::LeaderNetwork::new(n, &edges, &leader) {
            if net.verify_global_sink() {
                return (net, edges, leader);
            }
        }
    }
}
