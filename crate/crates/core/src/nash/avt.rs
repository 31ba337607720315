use nalgebra::{DMatrix, DVector};

use super::lp::{solve, LinearProgram, LpOutcome};
use super::maxent::{maxent_on_polytope, MaxentFailure, MaxentSolution};
use super::{entropy, support_of, DEFAULT_MAX_ITER};
use crate::avt::{uniform_averages, UniformAverages};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NashEvaluationAvT {
    pub agent_distribution: DVector<f64>,
    pub task_distribution: DVector<f64>,
    /// Value of the zero-sum game on `S`.
    pub value: f64,
    /// `S p_e`: how well each agent does against the Nash task mix.
    pub agent_nash_avg: DVector<f64>,
    /// `-S^T p_a`: how hard each task is for the Nash agent mix.
    pub task_nash_avg: DVector<f64>,
    pub agent_support: Vec<usize>,
    pub task_support: Vec<usize>,
    /// `max_i (S p_e)_i - min_j (S^T p_a)_j`, the largest gain from a joint
    /// deviation; zero at an exact equilibrium.
    pub exploitability: f64,
    pub agent_entropy: f64,
    pub task_entropy: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl NashEvaluationAvT {
    pub(crate) fn from_parts(
        s: &DMatrix<f64>,
        pa: DVector<f64>,
        pe: DVector<f64>,
        value: f64,
        iterations: usize,
        residual: f64,
    ) -> Self {
        let agent_nash_avg = s * &pe;
        let guaranteed = s.transpose() * &pa;
        let exploitability = agent_nash_avg.max() - guaranteed.min();
        NashEvaluationAvT {
            agent_support: support_of(&pa),
            task_support: support_of(&pe),
            agent_entropy: entropy(&pa),
            task_entropy: entropy(&pe),
            agent_distribution: pa,
            task_distribution: pe,
            value,
            agent_nash_avg,
            task_nash_avg: -guaranteed,
            exploitability,
            iterations,
            residual,
        }
    }
}

/// Skill (row means) and difficulty (negated column means).
pub fn uniform_averages_avt(s: &DMatrix<f64>) -> UniformAverages {
    uniform_averages(s)
}

/// Value of the zero-sum game on `S` with the row player maximising.
fn game_value(s: &DMatrix<f64>) -> Result<f64> {
    let (m, n) = s.shape();
    // shift to positive payoffs: min sum x s.t. S'^T x >= 1, value = 1 / sum x
    let shift = 1.0 - s.min();
    let lp = LinearProgram {
        c: DVector::from_element(m, -1.0),
        a_ub: DMatrix::from_fn(n, m, |j, i| -(s[(i, j)] + shift)),
        b_ub: DVector::from_element(n, -1.0),
        a_eq: DMatrix::zeros(0, m),
        b_eq: DVector::zeros(0),
    };
    match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => Ok(1.0 / x.sum() - shift),
        other => Err(Error::Solver(format!("value LP ended {other:?}"))),
    }
}

/// Maxent over `{p in simplex : g(slack) p <= 0}`, widening the slack when
/// rounding in the game value leaves the polytope empty.
fn solve_side(g: impl Fn(f64) -> DMatrix<f64>, base_slack: f64, tol: f64, max_iter: usize) -> Result<MaxentSolution> {
    let mut slack = base_slack;
    for _ in 0..7 {
        match maxent_on_polytope(&g(slack), tol, max_iter) {
            Ok(sol) => return Ok(sol),
            Err(MaxentFailure::Empty) => slack *= 10.0,
            Err(MaxentFailure::Error(e)) => return Err(e),
        }
    }
    Err(Error::Solver("optimal-strategy polytope is empty".into()))
}

/// Maxent Nash equilibrium of the agent-vs-task game.
///
/// The joint game in which agents and tasks each deviate decouples into the
/// zero-sum game on `S`: its value comes from an LP, and entropy is then
/// maximised separately over each side's optimal-strategy polytope.
pub fn maxent_nash_avt(s: &DMatrix<f64>, tol: f64) -> Result<NashEvaluationAvT> {
    maxent_nash_avt_with(s, tol, DEFAULT_MAX_ITER)
}

pub fn maxent_nash_avt_with(s: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<NashEvaluationAvT> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let (m, n) = s.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty score matrix".into()));
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("score matrix".into()));
    }
    let v = game_value(s)?;
    let base_slack = 1e-14 * s.amax().max(1.0);
    // agents guarantee (S^T p_a)_j >= v, tasks hold (S p_e)_i <= v
    let agent = solve_side(|d| DMatrix::from_fn(n, m, |j, i| (v - d) - s[(i, j)]), base_slack, tol, max_iter)?;
    let task = solve_side(|d| DMatrix::from_fn(m, n, |i, j| s[(i, j)] - (v + d)), base_slack, tol, max_iter)?;
    let iterations = agent.iterations + task.iterations;
    let residual = agent.kkt_residual.max(task.kkt_residual);
    let eval = NashEvaluationAvT::from_parts(s, agent.p, task.p, v, iterations, residual);
    if eval.exploitability > tol {
        return Err(Error::NonConvergence { iterations, residual: eval.exploitability });
    }
    Ok(eval)
}
