//! Maximum-entropy point of `{p in simplex : G p <= 0}`.
//!
//! The support LP fixes the coordinates that can be positive. On that support
//! the entropy program is solved through its dual
//!
//! ```text
//! minimise  g(y) = log sum_i exp(-(M^T y)_i)   subject to y >= 0,
//! ```
//!
//! whose minimiser gives `p = softmax(-M^T y)`. Rows that are tight on the
//! whole polytope get free multipliers instead. Projected Newton steps with
//! Levenberg damping cope with the singular Hessians of degenerate games.

use nalgebra::{DMatrix, DVector};

use super::lp::{implicit_equalities, maximal_support};
use crate::error::Error;
use crate::linalg::thin_svd;

/// Coordinates at or below this mass are outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-7;

/// Rows whose largest achievable slack stays below this count as tight.
const TIGHT_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct MaxentSolution {
    pub p: DVector<f64>,
    pub iterations: usize,
    /// Largest violation `max_k (G p)_k`, clipped at zero.
    pub infeasibility: f64,
    /// Natural residual of the dual bound-constrained problem.
    pub kkt_residual: f64,
}

pub(crate) enum MaxentFailure {
    Empty,
    Error(Error),
}

impl From<Error> for MaxentFailure {
    fn from(e: Error) -> Self {
        MaxentFailure::Error(e)
    }
}

fn softmax_neg(mt: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let z = -(mt * y);
    let zmax = z.max();
    let w = z.map(|v| (v - zmax).exp());
    let total = w.sum();
    (w / total, zmax + total.ln())
}

/// Divides every row by its largest entry. The polytope is unchanged and
/// the solver tolerances become relative to the data.
pub(crate) fn normalize_rows(g: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = g.clone();
    for mut row in out.row_iter_mut() {
        let m = row.amax();
        if m > 0.0 {
            row /= m;
        }
    }
    out
}

/// Projected-gradient residual; `signed` marks the multipliers held at `>= 0`.
fn natural_residual(y: &DVector<f64>, grad: &DVector<f64>, signed: &[bool]) -> f64 {
    (0..y.len())
        .map(|k| if signed[k] { (y[k] - (y[k] - grad[k]).max(0.0)).abs() } else { grad[k].abs() })
        .fold(0.0, f64::max)
}

/// Rows tight on the whole polytope become an orthonormal basis of their span
/// with free multipliers; the rest keep `y >= 0`. Without this split the dual
/// infimum is not attained and the multipliers drift off to infinity.
fn dual_rows(m: &DMatrix<f64>) -> std::result::Result<(DMatrix<f64>, Vec<bool>), Error> {
    let tight = implicit_equalities(m, TIGHT_THRESHOLD)?;
    let eq: Vec<usize> = (0..m.nrows()).filter(|&k| tight[k]).collect();
    let ineq: Vec<usize> = (0..m.nrows()).filter(|&k| !tight[k]).collect();
    let q = if eq.is_empty() {
        DMatrix::zeros(0, m.ncols())
    } else {
        let svd = thin_svd(&m.select_rows(&eq))?;
        let r = svd.rank(1e-9, 0.0);
        svd.v_t.rows(0, r).into_owned()
    };
    let mut out = DMatrix::zeros(q.nrows() + ineq.len(), m.ncols());
    out.rows_mut(0, q.nrows()).copy_from(&q);
    for (a, &k) in ineq.iter().enumerate() {
        out.row_mut(q.nrows() + a).copy_from(&m.row(k));
    }
    let signed = (0..out.nrows()).map(|k| k >= q.nrows()).collect();
    Ok((out, signed))
}

pub(crate) fn maxent_on_polytope(
    g: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<MaxentSolution, MaxentFailure> {
    let g = &normalize_rows(g);
    let n = g.ncols();
    let support = maximal_support(g, SUPPORT_THRESHOLD)?.ok_or(MaxentFailure::Empty)?;
    if support.is_empty() {
        return Err(MaxentFailure::Empty);
    }
    let rows: Vec<usize> = (0..g.nrows()).filter(|&k| support.iter().any(|&j| g[(k, j)] > 0.0)).collect();
    let embed = |ps: &DVector<f64>| {
        let mut p = DVector::zeros(n);
        for (b, &j) in support.iter().enumerate() {
            p[j] = ps[b];
        }
        p
    };
    let finish = |ps: DVector<f64>, iterations: usize, kkt_residual: f64| {
        let p = embed(&ps);
        let infeasibility = (g * &p).max().max(0.0);
        MaxentSolution { p, iterations, infeasibility, kkt_residual }
    };
    if rows.is_empty() || support.len() == 1 {
        let ps = DVector::from_element(support.len(), 1.0 / support.len() as f64);
        return Ok(finish(ps, 0, 0.0));
    }
    let (m, signed) = dual_rows(&DMatrix::from_fn(rows.len(), support.len(), |a, b| g[(rows[a], support[b])]))?;
    let mt = m.transpose();

    let mut y = DVector::zeros(m.nrows());
    let (mut ps, mut val) = softmax_neg(&mt, &y);
    if m.nrows() == 0 {
        return Ok(finish(ps, 0, 0.0));
    }
    let target = (tol * 1e-3).max(1e-14);
    let mut residual = f64::INFINITY;
    // Levenberg factor: shrinks after full Newton steps, grows after short ones
    let mut lambda = 1.0;
    for iter in 0..max_iter {
        let grad = -(&m * &ps);
        residual = natural_residual(&y, &grad, &signed);
        if residual <= target {
            return Ok(finish(ps, iter, residual));
        }
        let weighted = DMatrix::from_diagonal(&ps) - &ps * ps.transpose();
        let hess = &m * weighted * &mt;
        let eps_active = residual.min(1e-9);
        let free: Vec<usize> = (0..y.len()).filter(|&k| !(signed[k] && y[k] <= eps_active && grad[k] > 0.0)).collect();
        let mu = lambda * residual.min(1.0) + 1e-14;
        let mut dir = DVector::zeros(y.len());
        for k in 0..y.len() {
            if !free.contains(&k) {
                dir[k] = -grad[k] / (hess[(k, k)] + mu);
            }
        }
        if !free.is_empty() {
            let h = DMatrix::from_fn(free.len(), free.len(), |a, b| {
                hess[(free[a], free[b])] + if a == b { mu } else { 0.0 }
            });
            let rhs = DVector::from_fn(free.len(), |a, _| -grad[free[a]]);
            let step = h.cholesky().map(|c| c.solve(&rhs)).unwrap_or_else(|| rhs.map(|v| v / mu));
            for (a, &k) in free.iter().enumerate() {
                dir[k] = step[a];
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = &y + &dir * t;
            for k in 0..cand.len() {
                if signed[k] {
                    cand[k] = cand[k].max(0.0);
                }
            }
            let (cps, cval) = softmax_neg(&mt, &cand);
            let decrease = grad.dot(&(&cand - &y));
            if cval <= val + 1e-4 * decrease || (cval - val).abs() <= 1e-15 * val.abs().max(1.0) && decrease <= 0.0 {
                y = cand;
                ps = cps;
                val = cval;
                accepted = true;
                lambda = if t == 1.0 { (lambda * 0.25).max(1e-8) } else { (lambda * 4.0).min(1e8) };
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let grad = -(&m * &ps);
    let final_residual = natural_residual(&y, &grad, &signed).min(residual);
    let sol = finish(ps, max_iter, final_residual);
    if sol.infeasibility <= tol {
        Ok(sol)
    } else {
        Err(MaxentFailure::Error(Error::NonConvergence { iterations: max_iter, residual: sol.infeasibility }))
    }
}
