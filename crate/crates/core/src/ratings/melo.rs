//! Multidimensional Elo: `P(i beats j) = sigmoid(r_i - r_j + c_i^T Omega c_j)`
//! where each player carries a `2k`-dimensional cyclic feature vector and
//! `Omega` is the block-diagonal rotation generator.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{logistic_loss, EmpiricalProbs};
use crate::error::{Error, Result};
use crate::hodge::{center, sigmoid, RatingVector};

/// `sum_i (e_{2i-1} e_{2i}^T - e_{2i} e_{2i-1}^T)`.
pub fn omega(k: usize) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("omega needs k >= 1".into()));
    }
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for b in 0..k {
        m[(2 * b, 2 * b + 1)] = 1.0;
        m[(2 * b + 1, 2 * b)] = -1.0;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MEloModel {
    pub ratings: RatingVector,
    /// `n x 2k`; row `i` is player `i`'s cyclic feature vector.
    pub cyclic_features: DMatrix<f64>,
    pub k: usize,
}

impl MEloModel {
    pub fn new(ratings: RatingVector, cyclic_features: DMatrix<f64>) -> Result<Self> {
        if cyclic_features.nrows() != ratings.len() || !cyclic_features.ncols().is_multiple_of(2) {
            return Err(Error::Shape {
                expected: format!("{} x 2k cyclic features", ratings.len()),
                got: format!("{:?}", cyclic_features.shape()),
            });
        }
        let k = cyclic_features.ncols() / 2;
        Ok(MEloModel { ratings, cyclic_features, k })
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        MEloModel { ratings: RatingVector::zeros(n), cyclic_features: DMatrix::zeros(n, 2 * k), k }
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let n = self.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        Ok(())
    }

    /// `c_i^T Omega c_j`.
    pub fn cyclic_term(&self, i: usize, j: usize) -> f64 {
        let c = &self.cyclic_features;
        (0..self.k).map(|b| c[(i, 2 * b)] * c[(j, 2 * b + 1)] - c[(j, 2 * b)] * c[(i, 2 * b + 1)]).sum()
    }

    pub fn logit(&self, i: usize, j: usize) -> f64 {
        let r = &self.ratings.values;
        if self.k == 0 {
            r[i] - r[j]
        } else {
            r[i] - r[j] + self.cyclic_term(i, j)
        }
    }

    pub fn predict(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i, j)?;
        Ok(sigmoid(self.logit(i, j)))
    }

    pub fn predicted_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| sigmoid(self.logit(i, j)))
    }

    /// The low-rank cyclic approximation `C Omega C^T`.
    pub fn cyclic_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.cyclic_term(i, j))
    }

    /// Online update towards target probability `p_ij`.
    ///
    /// `lr_r` is in display units, `lr_c` in natural units. Both feature
    /// updates use the feature values from before the step.
    pub fn update(&mut self, i: usize, j: usize, p_ij: f64, lr_r: f64, lr_c: f64) -> Result<()> {
        self.check(i, j)?;
        if !(0.0..=1.0).contains(&p_ij) {
            return Err(Error::InvalidArgument(format!("target probability {p_ij} outside [0, 1]")));
        }
        if i == j {
            return Ok(());
        }
        let delta = p_ij - sigmoid(self.logit(i, j));
        let step = lr_r * self.ratings.scale * delta;
        self.ratings.values[i] += step;
        self.ratings.values[j] -= step;
        let c = &mut self.cyclic_features;
        for b in 0..self.k {
            let (x, y) = (2 * b, 2 * b + 1);
            let (ci0, ci1, cj0, cj1) = (c[(i, x)], c[(i, y)], c[(j, x)], c[(j, y)]);
            c[(i, x)] += lr_c * delta * cj1;
            c[(i, y)] -= lr_c * delta * cj0;
            c[(j, x)] -= lr_c * delta * ci1;
            c[(j, y)] += lr_c * delta * ci0;
        }
        Ok(())
    }

    /// Re-imposes the structural constraints on the cyclic features.
    ///
    /// Columns are made orthogonal to the ones vector; the gradient flow this
    /// removes from each block is moved into the ratings, so predictions do
    /// not change. Columns are then made orthogonal to the ratings (only when
    /// at least `2k` dimensions remain for them) and to each other.
    pub fn reorthogonalize(&mut self) {
        let n = self.len();
        if self.k == 0 || n == 0 {
            return;
        }
        let c = &mut self.cyclic_features;
        for b in 0..self.k {
            let (u_mean, v_mean) = (c.column(2 * b).mean(), c.column(2 * b + 1).mean());
            for i in 0..n {
                self.ratings.values[i] += v_mean * c[(i, 2 * b)] - u_mean * c[(i, 2 * b + 1)];
            }
            c.column_mut(2 * b).add_scalar_mut(-u_mean);
            c.column_mut(2 * b + 1).add_scalar_mut(-v_mean);
        }
        center(&mut self.ratings.values);

        let mut fixed: Vec<DVector<f64>> = vec![DVector::from_element(n, 1.0 / (n as f64).sqrt())];
        let r_norm = self.ratings.values.norm();
        if n >= 2 * self.k + 2 && r_norm > 1e-12 {
            fixed.push(&self.ratings.values / r_norm);
        }
        for col in 0..2 * self.k {
            let mut v: DVector<f64> = c.column(col).into_owned();
            for q in &fixed {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
            for prev in 0..col {
                let u = c.column(prev);
                let uu = u.norm_squared();
                if uu > 1e-24 {
                    let p = u.dot(&v) / uu;
                    v.axpy(-p, &u.into_owned(), 1.0);
                }
            }
            c.set_column(col, &v);
        }
    }

    /// Largest |cosine| between any feature column and the ones vector, the
    /// ratings, or another feature column.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.len();
        let c = &self.cyclic_features;
        let ones = DVector::from_element(n, 1.0);
        let cos = |a: &DVector<f64>, b: &DVector<f64>| {
            let d = a.norm() * b.norm();
            if d < 1e-12 { 0.0 } else { (a.dot(b) / d).abs() }
        };
        let mut worst = 0.0f64;
        for col in 0..c.ncols() {
            let v: DVector<f64> = c.column(col).into_owned();
            worst = worst.max(cos(&v, &ones));
            if n >= 2 * self.k + 2 {
                worst = worst.max(cos(&v, &self.ratings.values));
            }
            for other in (col + 1)..c.ncols() {
                worst = worst.max(cos(&v, &c.column(other).into_owned()));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MEloConfig {
    pub k: usize,
    pub lr_r: f64,
    pub lr_c: f64,
    pub epochs: usize,
    /// Re-orthogonalise every this many epochs; 0 disables it.
    pub reorth_every: usize,
    pub seed: u64,
}

impl Default for MEloConfig {
    fn default() -> Self {
        MEloConfig { k: 1, lr_r: 16.0, lr_c: 1.0, epochs: 2000, reorth_every: 1, seed: 0 }
    }
}

/// Logistic loss of the model over the observed ordered pairs.
pub(crate) fn model_loss(empirical: &EmpiricalProbs, model: &MEloModel) -> f64 {
    empirical
        .observed_pairs()
        .into_iter()
        .map(|(i, j)| logistic_loss(empirical.probs[(i, j)], sigmoid(model.logit(i, j))))
        .sum()
}

/// Fits mElo by sweeping online updates over the observed ordered pairs in a
/// seeded random order each epoch.
pub fn melo_fit_batch(empirical: &EmpiricalProbs, config: &MEloConfig) -> Result<MEloModel> {
    let n = empirical.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MEloModel::zeros(n, config.k);
    // Zero features are a fixed point of the feature updates, so start small and random.
    for x in model.cyclic_features.iter_mut() {
        *x = rng.random_range(-0.5..0.5);
    }
    model.reorthogonalize();
    let mut pairs = empirical.observed_pairs();
    for epoch in 1..=config.epochs {
        pairs.shuffle(&mut rng);
        for &(i, j) in &pairs {
            model.update(i, j, empirical.probs[(i, j)], config.lr_r, config.lr_c)?;
        }
        if config.reorth_every > 0 && epoch % config.reorth_every == 0 {
            model.reorthogonalize();
        }
        if !model_loss(empirical, &model).is_finite() {
            return Err(Error::NonFinite(format!("mElo loss at epoch {epoch}")));
        }
    }
    center(&mut model.ratings.values);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn omega_structure() {
        assert_eq!(omega(1).unwrap(), DMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]));
        for k in 1..5 {
            let w = omega(k).unwrap();
            assert_eq!(w.transpose(), -&w);
            assert_eq!(&w * &w, -DMatrix::<f64>::identity(2 * k, 2 * k));
        }
        let w2 = omega(2).unwrap();
        assert_eq!(w2[(2, 3)], 1.0);
        assert_eq!(w2[(0, 3)], 0.0);
        assert!(omega(0).is_err());
    }

    fn unit_pair() -> MEloModel {
        MEloModel::new(RatingVector::zeros(2), DMatrix::from_row_slice(2, 2, &[1., 0., 0., 1.])).unwrap()
    }

    #[test]
    fn prediction_examples() {
        let m = unit_pair();
        assert_abs_diff_eq!(m.predict(0, 1).unwrap(), sigmoid(1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(m.predict(0, 1).unwrap(), 0.7310585786, epsilon = 1e-9);

        let same = MEloModel::new(
            RatingVector::from_display(&[100.0, -100.0]),
            DMatrix::from_row_slice(2, 2, &[0.3, -0.7, 0.3, -0.7]),
        )
        .unwrap();
        assert_eq!(same.cyclic_term(0, 1), 0.0);

        let c = DMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 * 0.4);
        let m = MEloModel::new(RatingVector::zeros(3), c.clone()).unwrap();
        let direct = c.row(0) * omega(1).unwrap() * c.row(2).transpose();
        assert_abs_diff_eq!(m.cyclic_term(0, 2), direct[(0, 0)], epsilon = 1e-15);
        assert!(m.predict(0, 3).is_err());
    }

    #[test]
    fn k_zero_is_elo_bitwise() {
        let r = RatingVector::from_display(&[120.0, -20.0, -100.0]);
        let m = MEloModel::new(r.clone(), DMatrix::zeros(3, 0)).unwrap();
        let e = super::super::EloState::with_ratings(r, 16.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.predict(i, j).unwrap().to_bits(), e.predict(i, j).unwrap().to_bits());
            }
        }
        let mut m2 = m.clone();
        let mut e2 = e.clone();
        m2.update(0, 2, 1.0, 16.0, 1.0).unwrap();
        e2.update(0, 2, 1.0).unwrap();
        assert_eq!(m2.ratings, e2.ratings);
    }

    #[test]
    fn update_examples() {
        let mut m = unit_pair();
        let p = m.predict(0, 1).unwrap();
        let before = m.clone();
        m.update(0, 1, p, 16.0, 1.0).unwrap();
        assert_eq!(m, before);

        m.update(0, 1, 1.0, 16.0, 1.0).unwrap();
        let delta = 1.0 - sigmoid(1.0);
        assert_abs_diff_eq!(delta, 0.2689414, epsilon = 1e-7);
        let d = m.ratings.display();
        assert_abs_diff_eq!(d[0], 16.0 * delta, epsilon = 1e-9);
        assert_abs_diff_eq!(d[0], 4.303, epsilon = 1e-3);
        assert_abs_diff_eq!(d[1], -16.0 * delta, epsilon = 1e-9);
        // c_i += delta (c_j[1], -c_j[0]); c_j += delta (-c_i[1], c_i[0])
        assert_abs_diff_eq!(m.cyclic_features[(0, 0)], 1.0 + delta, epsilon = 1e-15);
        assert_abs_diff_eq!(m.cyclic_features[(0, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.cyclic_features[(1, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.cyclic_features[(1, 1)], 1.0 + delta, epsilon = 1e-15);
    }

    #[test]
    fn reorthogonalize_preserves_predictions_when_only_centring() {
        let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, -0.3, 0.9, 0.4, -0.1]);
        let mut m = MEloModel::new(RatingVector::from_display(&[50.0, 0.0, -50.0]), c).unwrap();
        let before = m.predicted_matrix();
        m.reorthogonalize();
        assert_abs_diff_eq!(m.predicted_matrix(), before, epsilon = 1e-12);
        assert!(m.orthogonality_defect() < 1e-9);
    }

    #[test]
    fn reorthogonalize_enforces_constraints_with_room() {
        let c = DMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * j as f64);
        let mut m = MEloModel::new(RatingVector::from_display(&[80., 40., 0., -10., -50., -60.]), c).unwrap();
        m.reorthogonalize();
        assert!(m.orthogonality_defect() < 1e-9);
        assert_abs_diff_eq!(m.ratings.sum(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_is_deterministic_for_a_seed() {
        let p = EmpiricalProbs::from_rows(&[&[0.5, 0.9, 0.1], &[0.1, 0.5, 0.9], &[0.9, 0.1, 0.5]]).unwrap();
        let cfg = MEloConfig { epochs: 50, ..MEloConfig::default() };
        assert_eq!(melo_fit_batch(&p, &cfg).unwrap(), melo_fit_batch(&p, &cfg).unwrap());
        let other = MEloConfig { seed: 7, ..cfg.clone() };
        assert_ne!(melo_fit_batch(&p, &cfg).unwrap(), melo_fit_batch(&p, &other).unwrap());
    }

    #[test]
    fn fits_rock_paper_scissors() {
        let p = EmpiricalProbs::from_rows(&[&[0.5, 0.99, 0.01], &[0.01, 0.5, 0.99], &[0.99, 0.01, 0.5]]).unwrap();
        let m = melo_fit_batch(&p, &MEloConfig::default()).unwrap();
        for (i, j) in p.observed_pairs() {
            assert_eq!(m.predict(i, j).unwrap() > 0.5, p.probs[(i, j)] > 0.5);
        }
    }
}
