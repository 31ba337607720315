//! Elo and multidimensional Elo (mElo) rating models.
//!
//! Ratings are stored in natural-logit units: `P(i beats j) = sigmoid(r_i - r_j)`.
//! Learning rates for ratings are given in display (Elo) units, so the
//! classic `eta = 16` moves a rating by 8 display points after an even-odds win.

mod elo;
mod melo;
mod metrics;

pub use elo::{elo_fit_batch, elo_fixed_point_residual, EloFit, EloState};
pub use melo::{melo_fit_batch, omega, MEloConfig, MEloModel};
pub use metrics::{logistic_loss, prediction_metrics, PredictionMetrics};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hodge::{check_distinct, default_labels};

/// Raw (possibly fractional) win tallies: `wins[(i, j)]` is how often `i` beat `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCounts {
    pub wins: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl PairwiseCounts {
    pub fn new(wins: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if !wins.is_square() {
            return Err(Error::NotSquare { rows: wins.nrows(), cols: wins.ncols() });
        }
        if labels.len() != wins.nrows() {
            return Err(Error::Shape { expected: format!("{} labels", wins.nrows()), got: labels.len().to_string() });
        }
        check_distinct(&labels)?;
        for i in 0..wins.nrows() {
            if wins[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("player {i} has self-play wins")));
            }
        }
        if wins.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("win counts must be finite and nonnegative".into()));
        }
        Ok(PairwiseCounts { wins, labels })
    }

    pub fn len(&self) -> usize {
        self.wins.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Empirical win probabilities with a mask of observed pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProbs {
    pub probs: DMatrix<f64>,
    pub support_mask: DMatrix<bool>,
    pub labels: Vec<String>,
}

impl EmpiricalProbs {
    /// Validates complementarity (within `1e-9`) on observed pairs. Unobserved
    /// entries are stored as `0.5`; the diagonal is `0.5` and never observed.
    pub fn new(probs: DMatrix<f64>, support_mask: DMatrix<bool>, labels: Vec<String>) -> Result<Self> {
        let n = probs.nrows();
        if !probs.is_square() {
            return Err(Error::NotSquare { rows: n, cols: probs.ncols() });
        }
        if support_mask.shape() != probs.shape() {
            return Err(Error::Shape { expected: format!("{n}x{n} mask"), got: format!("{:?}", support_mask.shape()) });
        }
        if labels.len() != n {
            return Err(Error::Shape { expected: format!("{n} labels"), got: labels.len().to_string() });
        }
        check_distinct(&labels)?;
        let mut probs = probs;
        let mut mask = support_mask;
        for i in 0..n {
            mask[(i, i)] = false;
            probs[(i, i)] = 0.5;
            for j in (i + 1)..n {
                if mask[(i, j)] != mask[(j, i)] {
                    return Err(Error::InvalidArgument(format!("support mask not symmetric at ({i}, {j})")));
                }
                if !mask[(i, j)] {
                    probs[(i, j)] = 0.5;
                    probs[(j, i)] = 0.5;
                    continue;
                }
                let (pij, pji) = (probs[(i, j)], probs[(j, i)]);
                if !(0.0..=1.0).contains(&pij) || !(0.0..=1.0).contains(&pji) {
                    return Err(Error::InvalidArgument(format!("probability out of [0, 1] at ({i}, {j})")));
                }
                if (pij + pji - 1.0).abs() > 1e-9 {
                    return Err(Error::NonComplementary { i, j, p_ij: pij, p_ji: pji });
                }
            }
        }
        Ok(EmpiricalProbs { probs, support_mask: mask, labels })
    }

    /// Every off-diagonal pair observed.
    pub fn dense(probs: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = probs.nrows();
        let mask = DMatrix::from_fn(n, probs.ncols(), |i, j| i != j);
        Self::new(probs, mask, labels)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: rows.first().map_or(0, |r| r.len()) });
        }
        Self::dense(DMatrix::from_fn(n, n, |i, j| rows[i][j]), default_labels(n))
    }

    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observed(&self, i: usize, j: usize) -> bool {
        self.support_mask[(i, j)]
    }

    /// Ordered observed pairs `(i, j)`, `i != j`, in row-major order.
    pub fn observed_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.support_mask[(i, j)]).collect()
    }

    pub fn fully_observed(&self) -> bool {
        self.observed_pairs().len() == self.len() * self.len().saturating_sub(1)
    }

    /// Probabilities clamped to `[eps, 1 - eps]`, keeping complementarity.
    pub fn clamped(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidArgument(format!("clamp_eps must lie in (0, 0.5), got {eps}")));
        }
        let n = self.len();
        let mut probs = self.probs.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = probs[(i, j)].clamp(eps, 1.0 - eps);
                probs[(i, j)] = p;
                probs[(j, i)] = 1.0 - p;
            }
        }
        Ok(EmpiricalProbs { probs, support_mask: self.support_mask.clone(), labels: self.labels.clone() })
    }

    /// True when the undirected graph of observed pairs is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && self.support_mask[(i, j)] {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// `p_ij = (wins_ij + s) / (wins_ij + wins_ji + 2s)` on pairs with any games
/// (or any smoothing); other pairs are masked out.
pub fn empirical_probs(counts: &PairwiseCounts, smoothing: f64) -> Result<EmpiricalProbs> {
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing must be nonnegative, got {smoothing}")));
    }
    let n = counts.len();
    let mut probs = DMatrix::from_element(n, n, 0.5);
    let mut mask = DMatrix::from_element(n, n, false);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let total = counts.wins[(i, j)] + counts.wins[(j, i)];
            if total > 0.0 {
                probs[(i, j)] = (counts.wins[(i, j)] + smoothing) / (total + 2.0 * smoothing);
                mask[(i, j)] = true;
            }
        }
    }
    EmpiricalProbs::new(probs, mask, counts.labels.clone())
}
