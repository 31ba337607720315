//! Maximum-entropy Nash equilibria and Nash averaging.
//!
//! For an antisymmetric payoff `A` a symmetric Nash equilibrium is a
//! distribution `p` with `A p <= 0`: no player earns positive log-odds against
//! the team `p`. The maxent equilibrium is unique and its Nash average `A p`
//! is invariant to duplicated players.
//!
//! Agent-vs-task data is handled as the zero-sum game on `S` (agents
//! maximise, tasks minimise); see [`maxent_nash_avt`].

mod avt;
mod lp;
mod maxent;
mod oracle;

pub use avt::{maxent_nash_avt, maxent_nash_avt_with, uniform_averages_avt, NashEvaluationAvT};
pub use maxent::SUPPORT_THRESHOLD;
pub use oracle::{
    brute_force_avt_oracle, brute_force_maxent_oracle, support_enumeration_value, ORACLE_MAX_PLAYERS, ORACLE_MAX_SIDE,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hodge::{div, grad, repair_antisymmetric};
use maxent::{maxent_on_polytope, MaxentFailure};

/// Default iteration cap for the dual Newton solver.
pub const DEFAULT_MAX_ITER: usize = 500;

/// Tolerance on `sum p = 1` and `p >= 0` when a distribution is supplied.
const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NashEvaluationAvA {
    pub distribution: DVector<f64>,
    pub nash_average: DVector<f64>,
    /// Shannon entropy in nats.
    pub entropy: f64,
    pub exploitability: f64,
    pub support: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashCertificate {
    pub is_nash: bool,
    pub exploitability: f64,
}

/// `-sum p_i ln p_i` with `0 ln 0 = 0`.
pub fn entropy(p: &DVector<f64>) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Indices carrying more than [`SUPPORT_THRESHOLD`] mass.
pub fn support_of(p: &DVector<f64>) -> Vec<usize> {
    (0..p.len()).filter(|&i| p[i] > SUPPORT_THRESHOLD).collect()
}

pub(crate) fn check_simplex(p: &DVector<f64>, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Shape { expected: format!("distribution of length {n}"), got: p.len().to_string() });
    }
    if let Some(bad) = p.iter().find(|&&x| !x.is_finite() || x < -SIMPLEX_TOL) {
        return Err(Error::OffSimplex(format!("entry {bad}")));
    }
    let total = p.sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::OffSimplex(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Exploitability `max_i (A p)_i` of a symmetric strategy.
pub fn nash_certificate_ava(a: &DMatrix<f64>, p: &DVector<f64>, tol: f64) -> Result<NashCertificate> {
    let a = repair_antisymmetric(a)?;
    check_simplex(p, a.nrows())?;
    let exploitability = (&a * p).max();
    Ok(NashCertificate { is_nash: exploitability <= tol, exploitability })
}

/// `A p`.
pub fn nash_average_ava(a: &DMatrix<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
    check_simplex(p, a.ncols())?;
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a * p)
}

/// `max(0, max_i (A p)_i)`.
pub fn epsilon_exploitability(a: &DMatrix<f64>, p: &DVector<f64>) -> Result<f64> {
    Ok(nash_average_ava(a, p)?.max().max(0.0))
}

/// The maximum-entropy symmetric Nash equilibrium of an antisymmetric game.
pub fn maxent_nash_ava(a: &DMatrix<f64>, tol: f64) -> Result<NashEvaluationAvA> {
    maxent_nash_ava_with(a, tol, DEFAULT_MAX_ITER)
}

pub fn maxent_nash_ava_with(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<NashEvaluationAvA> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let a = repair_antisymmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let sol = match maxent_on_polytope(&a, tol, max_iter) {
        Ok(s) => s,
        Err(MaxentFailure::Empty) => {
            return Err(Error::Solver("Nash polytope of an antisymmetric game came out empty".into()))
        }
        Err(MaxentFailure::Error(e)) => return Err(e),
    };
    let p = sol.p;
    let nash_average = &a * &p;
    Ok(NashEvaluationAvA {
        entropy: entropy(&p),
        support: support_of(&p),
        exploitability: nash_average.max().max(0.0),
        distribution: p,
        nash_average,
        iterations: sol.iterations,
        residual: sol.kkt_residual.max(sol.infeasibility),
    })
}

/// Inserts `copies` clones of player `idx` directly after it.
pub fn duplicate_player(a: &DMatrix<f64>, idx: usize, copies: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::NotSquare { rows: n, cols: a.ncols() });
    }
    if idx >= n {
        return Err(Error::IndexOutOfRange { index: idx, len: n });
    }
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be at least 1".into()));
    }
    let origin: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, if i == idx { copies + 1 } else { 1 })).collect();
    let size = origin.len();
    Ok(DMatrix::from_fn(size, size, |r, c| a[(origin[r], origin[c])]))
}

/// Removes player `idx`; the inverse of [`duplicate_player`] on a copy.
pub fn delete_player(a: &DMatrix<f64>, idx: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if idx >= n {
        return Err(Error::IndexOutOfRange { index: idx, len: n });
    }
    Ok(a.clone().remove_row(idx).remove_column(idx))
}

/// Solves `A` and `A` with player `idx` duplicated; true iff the other
/// players keep their mass, the two copies split the original mass evenly,
/// and the Nash averages of the original players agree, all within `tol`.
pub fn invariance_check(a: &DMatrix<f64>, idx: usize, tol: f64) -> Result<bool> {
    let base = maxent_nash_ava(a, 1e-10)?;
    let dup = maxent_nash_ava(&duplicate_player(a, idx, 1)?, 1e-10)?;
    let n = a.nrows();
    let mut ok = true;
    for i in 0..n {
        let j = if i > idx { i + 1 } else { i };
        if i == idx {
            ok &= (dup.distribution[idx] - base.distribution[idx] / 2.0).abs() <= tol;
            ok &= (dup.distribution[idx + 1] - base.distribution[idx] / 2.0).abs() <= tol;
        } else {
            ok &= (dup.distribution[j] - base.distribution[i]).abs() <= tol;
        }
        ok &= (dup.nash_average[j] - base.nash_average[i]).abs() <= tol;
    }
    Ok(ok)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpretability {
    /// `div(A) = 0`: every player is equally good on average.
    pub cyclic: bool,
    /// `A = grad(r)`: scalar ratings explain everything.
    pub transitive: bool,
    /// Closed-form maxent Nash when either structure holds.
    pub maxent_prediction: Option<DVector<f64>>,
}

pub fn interpretability_report(a: &DMatrix<f64>, tol: f64) -> Result<Interpretability> {
    let a = repair_antisymmetric(a)?;
    let n = a.nrows();
    let r = div(&a);
    let cyclic = r.amax() <= tol;
    let transitive = (&a - grad(&r)).amax() <= tol;
    let maxent_prediction = if cyclic {
        Some(DVector::from_element(n, 1.0 / n as f64))
    } else if transitive {
        let best = r.max();
        let top: Vec<usize> = (0..n).filter(|&i| r[i] >= best - tol).collect();
        let mut p = DVector::zeros(n);
        for &i in &top {
            p[i] = 1.0 / top.len() as f64;
        }
        Some(p)
    } else {
        None
    };
    Ok(Interpretability { cyclic, transitive, maxent_prediction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rps() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0.0, 4.6, -4.6, -4.6, 0.0, 4.6, 4.6, -4.6, 0.0])
    }

    fn c_plus_t(eps: f64) -> DMatrix<f64> {
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0]);
        c + grad(&DVector::from_vec(vec![1.0, 0.0, -1.0])) * eps
    }

    #[test]
    fn certificate_examples() {
        let u = DVector::from_element(3, 1.0 / 3.0);
        let c = nash_certificate_ava(&rps(), &u, 1e-8).unwrap();
        assert!(c.is_nash);
        assert_abs_diff_eq!(c.exploitability, 0.0, epsilon = 1e-12);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(nash_certificate_ava(&rps(), &e1, 1e-8).unwrap().exploitability, 4.6, epsilon = 1e-12);
        let t = grad(&DVector::from_vec(vec![1.0, 0.0, -1.0]));
        assert!(nash_certificate_ava(&t, &e1, 1e-8).unwrap().is_nash);
        let off = DVector::from_vec(vec![0.5, 0.6, 0.0]);
        assert!(matches!(nash_certificate_ava(&rps(), &off, 1e-8), Err(Error::OffSimplex(_))));
    }

    #[test]
    fn invariance_example() {
        let e = maxent_nash_ava(&rps(), 1e-8).unwrap();
        for v in e.distribution.iter() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-9);
        }
        let dup = duplicate_player(&rps(), 2, 1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 4.6, -4.6, -4.6, -4.6, 0.0, 4.6, 4.6, 4.6, -4.6, 0.0, 0.0, 4.6, -4.6, 0.0, 0.0],
        );
        assert_eq!(dup, expected);
        let e = maxent_nash_ava(&dup, 1e-8).unwrap();
        for (v, x) in e.distribution.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*v, x, epsilon = 1e-9);
        }
        assert!(e.nash_average.amax() < 1e-9);
    }

    #[test]
    fn continuity_example() {
        for eps in [0.0, 0.1, 0.25, 0.4] {
            let e = maxent_nash_ava(&c_plus_t(eps), 1e-8).unwrap();
            let expected = [(1.0 + eps) / 3.0, (1.0 - 2.0 * eps) / 3.0, (1.0 + eps) / 3.0];
            for (v, x) in e.distribution.iter().zip(expected) {
                assert_abs_diff_eq!(*v, x, epsilon = 1e-9);
            }
            assert!(e.nash_average.amax() < 1e-9);
        }
        for eps in [0.6, 1.0] {
            let e = maxent_nash_ava(&c_plus_t(eps), 1e-8).unwrap();
            assert_abs_diff_eq!(e.distribution[0], 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(e.nash_average[1], -1.0 - eps, epsilon = 1e-9);
            assert_abs_diff_eq!(e.nash_average[2], 1.0 - 2.0 * eps, epsilon = 1e-9);
            assert_eq!(epsilon_exploitability(&c_plus_t(eps), &e.distribution).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_sizes() {
        let e = maxent_nash_ava(&DMatrix::zeros(1, 1), 1e-8).unwrap();
        assert_eq!(e.distribution.as_slice(), &[1.0]);
        assert_eq!(e.nash_average.as_slice(), &[0.0]);
        assert_eq!(duplicate_player(&DMatrix::zeros(1, 1), 0, 1).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn duplicate_then_delete() {
        let a = c_plus_t(0.3);
        for idx in 0..3 {
            let d = duplicate_player(&a, idx, 2).unwrap();
            assert_eq!(d.nrows(), 5);
            assert_eq!(delete_player(&delete_player(&d, idx + 1).unwrap(), idx + 1).unwrap(), a);
        }
        assert!(matches!(duplicate_player(&a, 3, 1), Err(Error::IndexOutOfRange { index: 3, len: 3 })));
    }

    #[test]
    fn invariance_and_ties() {
        for idx in 0..3 {
            assert!(invariance_check(&rps(), idx, 1e-6).unwrap());
        }
        let t = grad(&DVector::from_vec(vec![1.0, 0.0, -1.0]));
        assert!(invariance_check(&t, 0, 1e-6).unwrap());
        let e = maxent_nash_ava(&duplicate_player(&t, 0, 1).unwrap(), 1e-8).unwrap();
        assert_abs_diff_eq!(e.distribution[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(e.distribution[1], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn interpretability_examples() {
        let r = interpretability_report(&c_plus_t(0.0), 1e-9).unwrap();
        assert!(r.cyclic && !r.transitive);
        assert_eq!(r.maxent_prediction.unwrap().len(), 3);
        let t = grad(&DVector::from_vec(vec![1.0, 0.0, -1.0]));
        let r = interpretability_report(&t, 1e-9).unwrap();
        assert!(r.transitive && !r.cyclic);
        assert_eq!(r.maxent_prediction.unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        let tie = grad(&DVector::from_vec(vec![1.0, 1.0, -2.0]));
        assert_eq!(interpretability_report(&tie, 1e-9).unwrap().maxent_prediction.unwrap().as_slice(), &[0.5, 0.5, 0.0]);
        assert!(interpretability_report(&c_plus_t(0.3), 1e-9).unwrap().maxent_prediction.is_none());
    }
}
