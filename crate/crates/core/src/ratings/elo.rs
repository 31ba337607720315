use nalgebra::{DMatrix, DVector};

use super::{logistic_loss, EmpiricalProbs};
use crate::error::{Error, Result};
use crate::hodge::{center, sigmoid, RatingVector};

#[derive(Debug, Clone, PartialEq)]
pub struct EloState {
    pub ratings: RatingVector,
    /// Step size in display units (16 or 32 for classic Elo).
    pub learning_rate: f64,
}

impl EloState {
    pub fn new(n: usize, learning_rate: f64) -> Self {
        EloState { ratings: RatingVector::zeros(n), learning_rate }
    }

    pub fn with_ratings(ratings: RatingVector, learning_rate: f64) -> Self {
        EloState { ratings, learning_rate }
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let n = self.ratings.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        Ok(())
    }

    /// `sigmoid(r_i - r_j)`.
    pub fn predict(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i, j)?;
        Ok(sigmoid(self.ratings.values[i] - self.ratings.values[j]))
    }

    pub fn predicted_matrix(&self) -> DMatrix<f64> {
        let r = &self.ratings.values;
        DMatrix::from_fn(r.len(), r.len(), |i, j| sigmoid(r[i] - r[j]))
    }

    /// One online step after a match between `i` and `j` with `outcome`
    /// (1 = `i` won, fractions for draws). Both players move by the same
    /// amount in opposite directions, so the ratings keep summing to zero.
    pub fn update(&mut self, i: usize, j: usize, outcome: f64) -> Result<()> {
        self.check(i, j)?;
        if !(0.0..=1.0).contains(&outcome) {
            return Err(Error::InvalidArgument(format!("outcome {outcome} outside [0, 1]")));
        }
        if i == j {
            return Ok(());
        }
        let p_hat = self.predict(i, j)?;
        let step = self.learning_rate * self.ratings.scale * (outcome - p_hat);
        self.ratings.values[i] += step;
        self.ratings.values[j] -= step;
        Ok(())
    }
}

/// `residual_i = sum_j (p_emp_ij - p_pred_ij)` over observed `j`; zero exactly
/// at a stationary point of batch Elo.
pub fn elo_fixed_point_residual(empirical: &EmpiricalProbs, ratings: &RatingVector) -> DVector<f64> {
    let n = empirical.len();
    let r = &ratings.values;
    let mut res = DVector::zeros(n);
    for (i, j) in empirical.observed_pairs() {
        res[i] += empirical.probs[(i, j)] - sigmoid(r[i] - r[j]);
    }
    res
}

fn batch_loss(empirical: &EmpiricalProbs, r: &DVector<f64>) -> f64 {
    empirical
        .observed_pairs()
        .into_iter()
        .map(|(i, j)| logistic_loss(empirical.probs[(i, j)], sigmoid(r[i] - r[j])))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EloFit {
    pub state: EloState,
    pub iterations: usize,
    pub residual: f64,
}

/// Fits ratings whose predicted row sums match the empirical ones.
///
/// Damped Newton on the batch logistic loss. Every step solves
/// `(L + 11^T/n) d = residual` with `L` the weighted Laplacian, which moves
/// the ratings symmetrically and keeps them summing to zero.
pub fn elo_fit_batch(empirical: &EmpiricalProbs, tol: f64, max_iter: usize) -> Result<EloFit> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let n = empirical.len();
    if !empirical.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut r = DVector::zeros(n);
    let pairs = empirical.observed_pairs();
    let inv_n = 1.0 / n.max(1) as f64;
    let mut loss = batch_loss(empirical, &r);
    for iter in 0..=max_iter {
        let ratings = RatingVector::from_natural(r.clone());
        let res = elo_fixed_point_residual(empirical, &ratings);
        let worst = res.amax();
        if !worst.is_finite() {
            return Err(Error::NonFinite("Elo residual".into()));
        }
        if worst <= tol {
            return Ok(EloFit { state: EloState::with_ratings(ratings, 16.0), iterations: iter, residual: worst });
        }
        if iter == max_iter {
            return Err(Error::NonConvergence { iterations: iter, residual: worst });
        }
        let mut hess = DMatrix::from_element(n, n, inv_n);
        for &(i, j) in &pairs {
            let p = sigmoid(r[i] - r[j]);
            let w = p * (1.0 - p);
            hess[(i, i)] += w;
            hess[(i, j)] -= w;
        }
        let step = match hess.lu().solve(&res) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => return Err(Error::NonConvergence { iterations: iter, residual: worst }),
        };
        let mut t = 1.0;
        loop {
            let cand = &r + &step * t;
            let cand_loss = batch_loss(empirical, &cand);
            // near the optimum the loss is flat to rounding; judge by the residual there
            let flat = (cand_loss - loss).abs() <= 1e-13 * loss.abs().max(1.0)
                && elo_fixed_point_residual(empirical, &RatingVector::from_natural(cand.clone())).amax() < worst;
            if cand_loss <= loss || flat || t < 1e-10 {
                r = cand;
                loss = cand_loss;
                break;
            }
            t *= 0.5;
        }
        center(&mut r);
    }
    unreachable!("loop returns on its last iteration")
}
