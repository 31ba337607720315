//! Agent-vs-task score matrices and their antisymmetric embeddings.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hodge::{check_distinct, grad};

/// `m x n` scores: rows are agents, columns are tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub scores: DMatrix<f64>,
    pub agent_labels: Vec<String>,
    pub task_labels: Vec<String>,
}

impl ScoreMatrix {
    pub fn new(scores: DMatrix<f64>, agent_labels: Vec<String>, task_labels: Vec<String>) -> Result<Self> {
        let (m, n) = scores.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("score matrix needs at least one agent and one task".into()));
        }
        if agent_labels.len() != m || task_labels.len() != n {
            return Err(Error::Shape {
                expected: format!("{m} agent and {n} task labels"),
                got: format!("{} and {}", agent_labels.len(), task_labels.len()),
            });
        }
        if let Some(bad) = scores.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("score {bad}")));
        }
        check_distinct(&agent_labels)?;
        check_distinct(&task_labels)?;
        Ok(ScoreMatrix { scores, agent_labels, task_labels })
    }

    /// Labels agents `a1..am` and tasks `t1..tn`.
    pub fn unlabeled(scores: DMatrix<f64>) -> Result<Self> {
        let (m, n) = scores.shape();
        let agents = (1..=m).map(|i| format!("a{i}")).collect();
        let tasks = (1..=n).map(|j| format!("t{j}")).collect();
        Self::new(scores, agents, tasks)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged score rows".into()));
        }
        Self::unlabeled(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn agents(&self) -> usize {
        self.scores.nrows()
    }

    pub fn tasks(&self) -> usize {
        self.scores.ncols()
    }

    /// Agent labels followed by task labels, the player order of the embeddings.
    pub fn player_labels(&self) -> Vec<String> {
        self.agent_labels.iter().chain(&self.task_labels).cloned().collect()
    }

    pub fn with_scores(&self, scores: DMatrix<f64>) -> Self {
        ScoreMatrix { scores, agent_labels: self.agent_labels.clone(), task_labels: self.task_labels.clone() }
    }
}

/// Uniform averages: agent skill is the row mean, task difficulty the negated
/// column mean.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformAverages {
    pub skill: DVector<f64>,
    pub difficulty: DVector<f64>,
}

pub fn uniform_averages(s: &DMatrix<f64>) -> UniformAverages {
    let (m, n) = s.shape();
    let skill = DVector::from_fn(m, |i, _| s.row(i).sum() / n as f64);
    let difficulty = DVector::from_fn(n, |j, _| -s.column(j).sum() / m as f64);
    UniformAverages { skill, difficulty }
}

/// Subtracts the grand mean.
pub fn centered(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = s.mean();
    s.add_scalar(-mean)
}

/// The part of the scores not explained by `skill_i - difficulty_j` after
/// centring: `S_ij - rowmean_i - colmean_j + mean`.
pub fn cyclic_residual(s: &DMatrix<f64>) -> DMatrix<f64> {
    let c = centered(s);
    let avg = uniform_averages(&c);
    DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] - (avg.skill[i] - avg.difficulty[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMode {
    /// `[[0, S], [-S^T, 0]]`
    Naive,
    /// `[[grad(s), S], [-S^T, grad(d)]]` on the centred scores.
    Hodge,
}

pub fn embed_avt(s: &DMatrix<f64>, mode: EmbedMode) -> DMatrix<f64> {
    let (m, n) = s.shape();
    let mut out = DMatrix::zeros(m + n, m + n);
    let body = match mode {
        EmbedMode::Naive => s.clone(),
        EmbedMode::Hodge => centered(s),
    };
    out.view_mut((0, m), (m, n)).copy_from(&body);
    out.view_mut((m, 0), (n, m)).copy_from(&(-body.transpose()));
    if mode == EmbedMode::Hodge {
        let avg = uniform_averages(&body);
        out.view_mut((0, 0), (m, m)).copy_from(&grad(&avg.skill));
        out.view_mut((m, m), (n, n)).copy_from(&grad(&avg.difficulty));
    }
    out
}

/// True iff uniform skill and difficulty explain the scores to within `tol`.
pub fn avt_curl_criterion(s: &DMatrix<f64>, tol: f64) -> bool {
    cyclic_residual(s).amax() <= tol
}
