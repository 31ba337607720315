//! Linear programs through `microlp`.
//!
//! The Nash solvers only use LPs to locate supports and game values, then
//! polish with Newton steps, so a compact dense interface is enough.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `maximize c^T x` subject to `a_ub x <= b_ub`, `a_eq x = b_eq`, `x >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub c: DVector<f64>,
    pub a_ub: DMatrix<f64>,
    pub b_ub: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

pub(crate) fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.c.len();
    if (lp.a_ub.nrows() > 0 && lp.a_ub.ncols() != n) || (lp.a_eq.nrows() > 0 && lp.a_eq.ncols() != n) {
        return Err(Error::Shape { expected: format!("{n} LP columns"), got: "mismatched constraint matrix".into() });
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n).map(|j| problem.add_var(lp.c[j], (0.0, f64::INFINITY))).collect();
    let row = |m: &DMatrix<f64>, k: usize| -> Vec<_> {
        vars.iter().enumerate().filter(|&(j, _)| m[(k, j)] != 0.0).map(|(j, &v)| (v, m[(k, j)])).collect()
    };
    for k in 0..lp.a_ub.nrows() {
        problem.add_constraint(row(&lp.a_ub, k).as_slice(), ComparisonOp::Le, lp.b_ub[k]);
    }
    for k in 0..lp.a_eq.nrows() {
        problem.add_constraint(row(&lp.a_eq, k).as_slice(), ComparisonOp::Eq, lp.b_eq[k]);
    }
    let outcome = match problem.solve() {
        Ok(outcome) => outcome,
        Err(microlp::Error::Infeasible) => return Ok(LpOutcome::Infeasible),
        Err(microlp::Error::Unbounded) => return Ok(LpOutcome::Unbounded),
        Err(e) => return Err(Error::Solver(format!("LP solver: {e}"))),
    };
    let sol = outcome.solution().ok_or_else(|| Error::Solver("LP solver stopped without a solution".into()))?;
    let x = DVector::from_fn(n, |j, _| sol.var_value(vars[j]).max(0.0));
    Ok(LpOutcome::Optimal { value: lp.c.dot(&x), x })
}

/// Indices `i` for which some point of `{x in simplex : g x <= 0}` has
/// `x_i > threshold`, or `None` when the polytope is empty.
pub(crate) fn maximal_support(g: &DMatrix<f64>, threshold: f64) -> Result<Option<Vec<usize>>> {
    let n = g.ncols();
    let mut found = vec![false; n];
    let mut lp = LinearProgram {
        c: DVector::zeros(n),
        a_ub: g.clone(),
        b_ub: DVector::zeros(g.nrows()),
        a_eq: DMatrix::from_element(1, n, 1.0),
        b_eq: DVector::from_element(1, 1.0),
    };
    let mut tested = vec![false; n];
    for i in 0..n {
        if found[i] || tested[i] {
            continue;
        }
        tested[i] = true;
        lp.c.fill(0.0);
        lp.c[i] = 1.0;
        match solve(&lp)? {
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Solver("support LP unbounded on a simplex".into())),
            LpOutcome::Optimal { x, .. } => {
                for (j, &xj) in x.iter().enumerate() {
                    if xj > threshold {
                        found[j] = true;
                    }
                }
            }
        }
    }
    Ok(Some((0..n).filter(|&i| found[i]).collect()))
}

/// Flags the rows of `m p <= 0` that hold with equality at every feasible
/// point of the simplex. Slater fails on those rows, so the maxent dual needs
/// them as equalities to have a finite optimum.
pub(crate) fn implicit_equalities(m: &DMatrix<f64>, threshold: f64) -> Result<Vec<bool>> {
    let (rows, n) = m.shape();
    let mut slack = vec![false; rows];
    let mut lp = LinearProgram {
        c: DVector::zeros(n),
        a_ub: m.clone(),
        b_ub: DVector::zeros(rows),
        a_eq: DMatrix::from_element(1, n, 1.0),
        b_eq: DVector::from_element(1, 1.0),
    };
    for k in 0..rows {
        if slack[k] {
            continue;
        }
        lp.c = -m.row(k).transpose();
        match solve(&lp)? {
            LpOutcome::Optimal { x, .. } => {
                let mx = m * &x;
                for (l, v) in mx.iter().enumerate() {
                    if -v > threshold {
                        slack[l] = true;
                    }
                }
            }
            other => return Err(Error::Solver(format!("slack LP on a feasible polytope: {other:?}"))),
        }
    }
    Ok(slack.into_iter().map(|s| !s).collect())
}
