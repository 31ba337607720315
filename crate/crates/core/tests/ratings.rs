use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use nashavg::hodge::{sigmoid, RatingVector, ELO_SCALE};
use nashavg::ratings::{
    elo_fit_batch, elo_fixed_point_residual, logistic_loss, melo_fit_batch, EloState, EmpiricalProbs, MEloConfig,
    MEloModel,
};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Complementary win probabilities from any square matrix of draws in (0, 1).
fn probs(n: usize) -> impl Strategy<Value = EmpiricalProbs> {
    proptest::collection::vec(0.02f64..0.98, n * n).prop_map(move |v| {
        let p = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => v[i * n + j],
            std::cmp::Ordering::Greater => 1.0 - v[j * n + i],
            std::cmp::Ordering::Equal => 0.5,
        });
        EmpiricalProbs::dense(p, labels(n)).unwrap()
    })
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn batch_elo_reaches_the_row_sum_fixed_point(e in (2usize..8).prop_flat_map(probs)) {
        let fit = elo_fit_batch(&e, 1e-10, 200).unwrap();
        let res = elo_fixed_point_residual(&e, &fit.state.ratings);
        prop_assert!(res.amax() <= 1e-10);
        prop_assert!(fit.state.ratings.sum().abs() <= 1e-9);
    }

    #[test]
    fn batch_elo_recovers_generating_ratings(r in proptest::collection::vec(-400.0f64..400.0, 2..8)) {
        let truth = RatingVector::from_display(&r);
        let n = r.len();
        let p = DMatrix::from_fn(n, n, |i, j| sigmoid(truth.values[i] - truth.values[j]));
        let e = EmpiricalProbs::dense(p, labels(n)).unwrap();
        let fit = elo_fit_batch(&e, 1e-12, 200).unwrap();
        prop_assert!((&fit.state.ratings.values - &truth.values).amax() <= 1e-6);
    }

    #[test]
    fn elo_step_is_a_scaled_loss_gradient(
        r in proptest::collection::vec(-3.0f64..3.0, 4),
        outcome in 0.0f64..1.0,
        lr in 1.0f64..40.0,
    ) {
        let state = EloState::with_ratings(RatingVector::from_natural(DVector::from_vec(r.clone())), lr);
        let mut stepped = state.clone();
        stepped.update(0, 1, outcome).unwrap();
        let loss = |ri: f64| logistic_loss(outcome, sigmoid(ri - r[1]));
        let g = central_difference(loss, r[0]);
        let step = stepped.ratings.values[0] - r[0];
        prop_assert!((step - (-lr * ELO_SCALE * g)).abs() <= 1e-7 * (1.0 + step.abs()));
        prop_assert!((stepped.ratings.values[1] - r[1] + step).abs() <= 1e-12);
    }

    #[test]
    fn melo_step_is_a_scaled_loss_gradient(
        r in proptest::collection::vec(-2.0f64..2.0, 3),
        c in proptest::collection::vec(-1.0f64..1.0, 12),
        p in 0.0f64..1.0,
        lr_r in 1.0f64..32.0,
        lr_c in 0.1f64..2.0,
    ) {
        let model = MEloModel::new(
            RatingVector::from_natural(DVector::from_vec(r)),
            DMatrix::from_row_slice(3, 4, &c),
        ).unwrap();
        let (i, j) = (0, 2);
        let mut stepped = model.clone();
        stepped.update(i, j, p, lr_r, lr_c).unwrap();
        let loss_at = |m: &MEloModel| logistic_loss(p, sigmoid(m.logit(i, j)));

        let dr = central_difference(|x| {
            let mut m = model.clone();
            m.ratings.values[i] = x;
            loss_at(&m)
        }, model.ratings.values[i]);
        let step_r = stepped.ratings.values[i] - model.ratings.values[i];
        prop_assert!((step_r + lr_r * ELO_SCALE * dr).abs() <= 1e-6 * (1.0 + step_r.abs()));

        for (who, col) in [(i, 0), (i, 3), (j, 1), (j, 2)] {
            let x0 = model.cyclic_features[(who, col)];
            let d = central_difference(|x| {
                let mut m = model.clone();
                m.cyclic_features[(who, col)] = x;
                loss_at(&m)
            }, x0);
            let step = stepped.cyclic_features[(who, col)] - x0;
            prop_assert!((step + lr_c * d).abs() <= 1e-6 * (1.0 + step.abs()), "feature ({who}, {col})");
        }
    }
}

#[test]
fn melo_fit_keeps_its_constraints() {
    let e = EmpiricalProbs::from_rows(&[&[0.5, 0.7, 0.4], &[0.3, 0.5, 1.0], &[0.6, 0.0, 0.5]]).unwrap();
    let model = melo_fit_batch(&e, &MEloConfig { epochs: 300, ..MEloConfig::default() }).unwrap();
    assert!(model.ratings.sum().abs() < 1e-9);
    assert!(model.orthogonality_defect() < 1e-9);
    let again = melo_fit_batch(&e, &MEloConfig { epochs: 300, ..MEloConfig::default() }).unwrap();
    assert_eq!(model, again);
}

#[test]
fn unobserved_pairs_do_not_move_ratings() {
    // a, b, c in a chain: a-c is never played
    let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.75, 0.5, 0.25, 0.5, 0.75, 0.5, 0.25, 0.5]);
    let mask = DMatrix::from_fn(3, 3, |i, j| i != j && (i as i32 - j as i32).abs() == 1);
    let e = EmpiricalProbs::new(p, mask, labels(3)).unwrap();
    let fit = elo_fit_batch(&e, 1e-12, 100).unwrap();
    let r = &fit.state.ratings.values;
    assert!((sigmoid(r[0] - r[1]) - 0.75).abs() < 1e-10);
    assert!((sigmoid(r[1] - r[2]) - 0.75).abs() < 1e-10);
}
