use nalgebra::DMatrix;

use super::EmpiricalProbs;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionMetrics {
    /// `||P_emp - P_pred||_F` over ordered observed pairs.
    pub frobenius: f64,
    /// Summed cross-entropy over ordered observed pairs; `+inf` when a
    /// certain prediction is contradicted.
    pub log_loss: f64,
}

/// Cross-entropy of predicting `q` when the truth is `p`, with `0 log 0 = 0`.
pub fn logistic_loss(p: f64, q: f64) -> f64 {
    let term = |w: f64, x: f64| if w == 0.0 { 0.0 } else { -w * x.ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

pub fn prediction_metrics(empirical: &EmpiricalProbs, predicted: &DMatrix<f64>) -> Result<PredictionMetrics> {
    if predicted.shape() != empirical.probs.shape() {
        return Err(Error::Shape {
            expected: format!("{:?}", empirical.probs.shape()),
            got: format!("{:?}", predicted.shape()),
        });
    }
    let mut sq = 0.0;
    let mut loss = 0.0;
    for (i, j) in empirical.observed_pairs() {
        let (p, q) = (empirical.probs[(i, j)], predicted[(i, j)]);
        sq += (p - q).powi(2);
        loss += logistic_loss(p, q);
    }
    Ok(PredictionMetrics { frobenius: sq.sqrt(), log_loss: loss })
}
