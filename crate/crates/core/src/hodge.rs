//! Combinatorial Hodge theory on the complete graph.
//!
//! Evaluation data for `n` players is a flow: an antisymmetric `n x n` matrix
//! whose entry `(i, j)` measures how strongly `i` beats `j` (log-odds for
//! win-loss data). Three operators act on flows:
//!
//! * `grad(r)_ij = r_i - r_j` turns a rating vector into a flow,
//! * `div(A)_i = mean_j A_ij` recovers ratings (Elo in logit space),
//! * `rot(A) = A - grad(div(A))` is the cyclic residual.
//!
//! Every flow splits orthogonally into a transitive part `grad(div(A))` and a
//! cyclic part `rot(A)`; [`hodge_decompose`] returns both.

use std::collections::HashSet;
use std::f64::consts::LN_10;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Antisymmetry violations up to this size are repaired by `(A - A^T) / 2`.
pub const ANTISYMMETRY_REPAIR_TOL: f64 = 1e-9;

/// Default conversion from natural-logit ratings to display (Elo) units.
pub const ELO_SCALE: f64 = LN_10 / 400.0;

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("p{i}")).collect()
}

pub(crate) fn check_distinct(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::Labels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Largest `|a_ij + a_ji|` over all pairs, with its location.
pub fn antisymmetry_violation(a: &DMatrix<f64>) -> (f64, usize, usize) {
    let n = a.nrows();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in i..n {
            let v = (a[(i, j)] + a[(j, i)]).abs();
            if v > worst.0 || v.is_nan() {
                worst = (v, i, j);
            }
        }
    }
    worst
}

/// Validates `a` as antisymmetric, repairing float noise up to
/// [`ANTISYMMETRY_REPAIR_TOL`]. The returned matrix has an exactly zero
/// diagonal and satisfies `a == -a^T` bitwise.
pub fn repair_antisymmetric(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if let Some(bad) = a.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("matrix entry {bad}")));
    }
    let (violation, i, j) = antisymmetry_violation(a);
    if violation > ANTISYMMETRY_REPAIR_TOL {
        return Err(Error::NotAntisymmetric { i, j, violation });
    }
    Ok(antisymmetrize(a))
}

/// `(A - A^T) / 2` with the diagonal forced to zero.
pub fn antisymmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] - a[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = -v;
        }
    }
    out
}

/// An `n x n` antisymmetric matrix of log-odds with player labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricLogitMatrix {
    entries: DMatrix<f64>,
    labels: Vec<String>,
}

impl AntisymmetricLogitMatrix {
    pub fn new(entries: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if entries.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let entries = repair_antisymmetric(&entries)?;
        if labels.len() != entries.nrows() {
            return Err(Error::Shape {
                expected: format!("{} labels", entries.nrows()),
                got: format!("{} labels", labels.len()),
            });
        }
        check_distinct(&labels)?;
        Ok(AntisymmetricLogitMatrix { entries, labels })
    }

    /// Labels the players `p1..pn`.
    pub fn unlabeled(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, default_labels(n))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: rows.first().map_or(0, |r| r.len()) });
        }
        Self::unlabeled(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn div(&self) -> RatingVector {
        RatingVector::from_natural(div(&self.entries))
    }

    pub fn rot(&self) -> DMatrix<f64> {
        rot(&self.entries)
    }

    pub fn curl(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        curl(&self.entries, i, j, k)
    }

    pub fn decompose(&self) -> HodgeParts {
        hodge_decompose(&self.entries)
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
}

/// Ratings in natural-logit units plus the factor converting them to display
/// units (`display = value / scale`).
#[derive(Debug, Clone, PartialEq)]
pub struct RatingVector {
    pub values: DVector<f64>,
    pub scale: f64,
}

impl RatingVector {
    pub fn from_natural(values: DVector<f64>) -> Self {
        RatingVector { values, scale: ELO_SCALE }
    }

    /// Builds ratings from display (Elo) units, centring them to sum to zero.
    pub fn from_display(display: &[f64]) -> Self {
        let mut values = DVector::from_iterator(display.len(), display.iter().map(|d| d * ELO_SCALE));
        center(&mut values);
        RatingVector::from_natural(values)
    }

    pub fn zeros(n: usize) -> Self {
        RatingVector::from_natural(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn display(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.scale).collect()
    }

    pub fn sum(&self) -> f64 {
        self.values.sum()
    }
}

pub(crate) fn center(v: &mut DVector<f64>) {
    if v.is_empty() {
        return;
    }
    let mean = v.mean();
    v.add_scalar_mut(-mean);
}

/// Transitive and cyclic components of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeParts {
    pub transitive: DMatrix<f64>,
    pub cyclic: DMatrix<f64>,
    pub ratings: RatingVector,
}

/// Standard inner product `sum_ij a_ij b_ij`.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// `grad(r)_ij = r_i - r_j`.
pub fn grad(r: &DVector<f64>) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| r[i] - r[j])
}

/// `div(A)_i = (1/n) sum_j A_ij`.
pub fn div(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    if n == 0 {
        return DVector::zeros(0);
    }
    let inv = 1.0 / n as f64;
    DVector::from_fn(n, |i, _| a.row(i).sum() * inv)
}

/// `A_ij + A_jk - A_ik`, zero for every triple iff `A` is a gradient flow.
pub fn curl(a: &DMatrix<f64>, i: usize, j: usize, k: usize) -> Result<f64> {
    let n = a.nrows();
    for idx in [i, j, k] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    Ok(a[(i, j)] + a[(j, k)] - a[(i, k)])
}

/// Largest `|curl(A)_ijk|` over all triples without materialising the tensor.
pub fn max_abs_curl(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let aij = a[(i, j)];
            for k in 0..n {
                worst = worst.max((aij + a[(j, k)] - a[(i, k)]).abs());
            }
        }
    }
    worst
}

/// `rot(A)_ij = (1/n) sum_k curl(A)_ijk`, computed as `A - grad(div(A))`.
pub fn rot(a: &DMatrix<f64>) -> DMatrix<f64> {
    let r = div(a);
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] - (r[i] - r[j]))
}

pub fn hodge_decompose(a: &DMatrix<f64>) -> HodgeParts {
    let r = div(a);
    let transitive = grad(&r);
    let cyclic = a - &transitive;
    HodgeParts { transitive, cyclic, ratings: RatingVector::from_natural(r) }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Entrywise logit of a win-probability matrix.
///
/// Probabilities are clamped to `[clamp_eps, 1 - clamp_eps]` first so that
/// certain wins map to a finite log-odds (`ln(99)` for the default `0.01`).
/// Complementarity is checked to within `1e-9`.
pub fn logit_matrix(p: &DMatrix<f64>, clamp_eps: f64, labels: Vec<String>) -> Result<AntisymmetricLogitMatrix> {
    if !(clamp_eps > 0.0 && clamp_eps < 0.5) {
        return Err(Error::InvalidArgument(format!("clamp_eps must lie in (0, 0.5), got {clamp_eps}")));
    }
    if !p.is_square() {
        return Err(Error::NotSquare { rows: p.nrows(), cols: p.ncols() });
    }
    let n = p.nrows();
    for i in 0..n {
        for j in i..n {
            let (pij, pji) = (p[(i, j)], p[(j, i)]);
            if !(0.0..=1.0).contains(&pij) || !(0.0..=1.0).contains(&pji) {
                return Err(Error::InvalidArgument(format!("probability out of [0, 1] at ({i}, {j})")));
            }
            if (pij + pji - 1.0).abs() > 1e-9 {
                return Err(Error::NonComplementary { i, j, p_ij: pij, p_ji: pji });
            }
        }
    }
    let raw = DMatrix::from_fn(n, n, |i, j| logit(p[(i, j)].clamp(clamp_eps, 1.0 - clamp_eps)));
    AntisymmetricLogitMatrix::new(antisymmetrize(&raw), labels)
}

/// Entrywise sigmoid; the inverse of [`logit_matrix`] inside the clamp range.
pub fn sigmoid_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.map(sigmoid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cyc() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 1., -1., -1., 0., 1., 1., -1., 0.])
    }

    fn trans() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 1., 2., -1., 0., 1., -2., -1., 0.])
    }

    fn rps() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 4.6, -4.6, -4.6, 0., 4.6, 4.6, -4.6, 0.])
    }

    #[test]
    fn grad_examples() {
        assert_eq!(grad(&DVector::from_vec(vec![1., 0., -1.])), trans());
        assert_eq!(grad(&DVector::zeros(3)), DMatrix::zeros(3, 3));
        assert_eq!(
            grad(&DVector::from_vec(vec![2., -2.])),
            DMatrix::from_row_slice(2, 2, &[0., 4., -4., 0.])
        );
    }

    #[test]
    fn div_examples() {
        assert_abs_diff_eq!(div(&rps()), DVector::zeros(3), epsilon = 1e-15);
        let dup = DMatrix::from_row_slice(
            4,
            4,
            &[0., 4.6, -4.6, -4.6, -4.6, 0., 4.6, 4.6, 4.6, -4.6, 0., 0., 4.6, -4.6, 0., 0.],
        );
        assert_abs_diff_eq!(div(&dup), DVector::from_vec(vec![-1.15, 1.15, 0., 0.]), epsilon = 1e-9);
        assert_abs_diff_eq!(div(&trans()), DVector::from_vec(vec![1., 0., -1.]), epsilon = 1e-15);
    }

    #[test]
    fn curl_examples() {
        let t = trans();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_abs_diff_eq!(curl(&t, i, j, k).unwrap(), 0.0);
                }
            }
        }
        // C_12 + C_23 - C_13 = 1 + 1 - (-1)
        assert_abs_diff_eq!(curl(&cyc(), 0, 1, 2).unwrap(), 3.0);
        assert_abs_diff_eq!(curl(&rps(), 0, 1, 2).unwrap(), 13.8, epsilon = 1e-12);
        assert!(matches!(curl(&rps(), 0, 1, 3), Err(Error::IndexOutOfRange { index: 3, len: 3 })));
        assert_abs_diff_eq!(max_abs_curl(&rps()), 13.8, epsilon = 1e-12);
        assert_eq!(max_abs_curl(&t), 0.0);
    }

    #[test]
    fn rot_examples() {
        assert_abs_diff_eq!(rot(&trans()), DMatrix::zeros(3, 3), epsilon = 1e-15);
        assert_eq!(rot(&cyc()), cyc());
        assert_abs_diff_eq!(rot(&(cyc() + trans())), cyc(), epsilon = 1e-15);
    }

    #[test]
    fn rot_matches_curl_average() {
        let a = cyc() * 0.3 + trans() * 1.7 + rps();
        let r = rot(&a);
        for i in 0..3 {
            for j in 0..3 {
                let avg: f64 = (0..3).map(|k| curl(&a, i, j, k).unwrap()).sum::<f64>() / 3.0;
                assert_abs_diff_eq!(r[(i, j)], avg, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let p = hodge_decompose(&trans());
        assert_abs_diff_eq!(p.transitive, trans(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.cyclic, DMatrix::zeros(3, 3), epsilon = 1e-15);

        let p = hodge_decompose(&cyc());
        assert_eq!(p.transitive, DMatrix::zeros(3, 3));
        assert_eq!(p.ratings.values, DVector::zeros(3));

        let p = hodge_decompose(&(cyc() + trans()));
        assert_abs_diff_eq!(p.transitive, trans(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.cyclic, cyc(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.ratings.values, DVector::from_vec(vec![1., 0., -1.]), epsilon = 1e-15);
        assert!(inner(&p.transitive, &p.cyclic).abs() < 1e-12);
    }

    #[test]
    fn logit_examples() {
        let half = DMatrix::from_element(2, 2, 0.5);
        let a = logit_matrix(&half, 0.01, default_labels(2)).unwrap();
        assert_eq!(a.entries(), &DMatrix::zeros(2, 2));

        let sure = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        let a = logit_matrix(&sure, 0.01, default_labels(2)).unwrap();
        assert_abs_diff_eq!(a.entries()[(0, 1)], 99f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.entries()[(1, 0)], -99f64.ln(), epsilon = 1e-12);

        let go = DMatrix::from_row_slice(3, 3, &[0.5, 0.7, 0.4, 0.3, 0.5, 1.0, 0.6, 0.0, 0.5]);
        let a = logit_matrix(&go, 0.01, default_labels(3)).unwrap();
        assert_abs_diff_eq!(a.entries()[(0, 1)], (0.7f64 / 0.3).ln(), epsilon = 1e-12);
        assert!(a.entries().iter().all(|x| x.is_finite()));

        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.7, 0.5, 0.5]);
        assert!(matches!(logit_matrix(&bad, 0.01, default_labels(2)), Err(Error::NonComplementary { .. })));
        assert!(logit_matrix(&half, 0.5, default_labels(2)).is_err());
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid_matrix(&DMatrix::zeros(2, 2)), DMatrix::from_element(2, 2, 0.5));
        assert_abs_diff_eq!(sigmoid(4.6), 0.990048, epsilon = 1e-6);
        assert_abs_diff_eq!(sigmoid(-800.0), 0.0);
        assert_abs_diff_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn construction_repairs_noise_and_rejects_asymmetry() {
        let mut a = rps();
        a[(0, 1)] += 5e-10;
        let m = AntisymmetricLogitMatrix::unlabeled(a.clone()).unwrap();
        assert_eq!(m.entries(), &(-m.entries().transpose()));
        a[(0, 1)] += 1e-6;
        assert!(matches!(AntisymmetricLogitMatrix::unlabeled(a), Err(Error::NotAntisymmetric { i: 0, j: 1, .. })));
        let dup = vec!["a".to_string(), "a".to_string(), "b".to_string()];
        assert!(matches!(AntisymmetricLogitMatrix::new(rps(), dup), Err(Error::Labels(_))));
    }

    #[test]
    fn rating_display_units() {
        let r = RatingVector::from_display(&[400.0, 0.0]);
        assert_abs_diff_eq!(r.sum(), 0.0);
        assert_abs_diff_eq!(r.values[0] - r.values[1], LN_10, epsilon = 1e-12);
        let d = r.display();
        assert_abs_diff_eq!(d[0] - d[1], 400.0, epsilon = 1e-9);
    }

    fn antisym(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| antisymmetrize(&DMatrix::from_vec(n, n, v)))
    }

    proptest! {
        #[test]
        fn hodge_theorem_holds(a in (1usize..12).prop_flat_map(antisym)) {
            let parts = hodge_decompose(&a);
            let recon = &parts.transitive + &parts.cyclic;
            prop_assert!((recon - &a).amax() <= 1e-9);
            prop_assert!(inner(&parts.transitive, &parts.cyclic).abs() <= 1e-8 * a.norm_squared().max(1.0));
            prop_assert!(div(&parts.cyclic).amax() <= 1e-9);
            prop_assert!(rot(&parts.transitive).amax() <= 1e-9);
        }

        #[test]
        fn div_inverts_grad_on_zero_sum(v in proptest::collection::vec(-10.0f64..10.0, 1..15)) {
            let mut r = DVector::from_vec(v);
            center(&mut r);
            prop_assert!((div(&grad(&r)) - &r).amax() <= 1e-10);
        }

        #[test]
        fn sigmoid_inverts_logit(v in proptest::collection::vec(0.01f64..0.99, 6)) {
            let n = 4;
            let mut p = DMatrix::from_element(n, n, 0.5);
            let mut it = v.into_iter();
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = it.next().unwrap();
                    p[(i, j)] = x;
                    p[(j, i)] = 1.0 - x;
                }
            }
            let a = logit_matrix(&p, 0.01, default_labels(n)).unwrap();
            prop_assert!((sigmoid_matrix(a.entries()) - &p).amax() <= 1e-12);
        }
    }
}
