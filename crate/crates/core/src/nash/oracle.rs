//! Exhaustive reference solvers for small games.
//!
//! Nothing here shares code with the LP and dual-Newton route: the maxent
//! point is found by scanning every face of the polytope (a support set plus
//! a set of tight constraints), maximising entropy on each face's affine hull
//! with a primal Newton method, and keeping the best feasible candidate.

use nalgebra::{DMatrix, DVector};

use super::{entropy, support_of, NashEvaluationAvA, NashEvaluationAvT};
use crate::error::{Error, Result};
use crate::hodge::repair_antisymmetric;
use crate::linalg::thin_svd;

/// Largest AvA game the face scan accepts (3^8 faces).
pub const ORACLE_MAX_PLAYERS: usize = 8;
/// Largest side of an AvT game for the support-pair scan.
pub const ORACLE_MAX_SIDE: usize = 6;

const FEASIBILITY_TOL: f64 = 1e-9;

/// Orthonormal row-space basis of `e` and the matching right-hand side, or
/// `None` when `e x = b` is inconsistent.
fn reduce_equalities(e: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let svd = thin_svd(e).ok()?;
    let r = svd.rank(1e-10, 1.0);
    let f = svd.v_t.rows(0, r).into_owned();
    let h = DVector::from_fn(r, |a, _| svd.u.column(a).dot(b) / svd.s[a]);
    let x_ls = f.transpose() * &h;
    if (e * &x_ls - b).amax() > 1e-9 * (1.0 + b.amax()) * e.amax().max(1.0) {
        return None;
    }
    Some((f, h))
}

/// Entropy maximiser on `{x > 0 : e x = b}` by infeasible-start Newton, or
/// `None` when the face has no interior stationary point.
fn face_maxent(e: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let dim = e.ncols();
    let (f, h) = reduce_equalities(e, b)?;
    let r = f.nrows();
    if r == dim {
        let x = f.transpose() * &h;
        return x.iter().all(|&v| v > 0.0).then_some(x);
    }
    let mut x = DVector::from_element(dim, 1.0 / dim as f64);
    let mut nu = DVector::zeros(r);
    let residual = |x: &DVector<f64>, nu: &DVector<f64>| {
        let dual = x.map(|v| 1.0 + v.ln()) + f.transpose() * nu;
        let primal = &f * x - &h;
        (dual.norm_squared() + primal.norm_squared()).sqrt()
    };
    for _ in 0..200 {
        let res = residual(&x, &nu);
        if res < 1e-12 {
            return Some(x);
        }
        let mut kkt = DMatrix::zeros(dim + r, dim + r);
        for i in 0..dim {
            kkt[(i, i)] = 1.0 / x[i];
        }
        kkt.view_mut((0, dim), (dim, r)).copy_from(&f.transpose());
        kkt.view_mut((dim, 0), (r, dim)).copy_from(&f);
        let mut rhs = DVector::zeros(dim + r);
        rhs.rows_mut(0, dim).copy_from(&(-x.map(|v| 1.0 + v.ln())));
        rhs.rows_mut(dim, r).copy_from(&(-(&f * &x - &h)));
        let sol = kkt.lu().solve(&rhs)?;
        let dx = sol.rows(0, dim).into_owned();
        let nu_new = sol.rows(dim, r).into_owned();
        let dnu = &nu_new - &nu;
        let mut t = 1.0;
        loop {
            let cand = &x + &dx * t;
            if cand.iter().all(|&v| v > 0.0) {
                let cnu = &nu + &dnu * t;
                if residual(&cand, &cnu) <= (1.0 - 0.01 * t) * res {
                    x = cand;
                    nu = cnu;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return None;
            }
        }
    }
    (residual(&x, &nu) < 1e-9).then_some(x)
}

/// Maxent point of `{p in simplex : g p <= 0}` by scanning faces. `scale` is
/// the magnitude of the data `g` was built from. `forced` gives, for a support
/// set, the rows known to be tight on it; only the remaining rows are
/// enumerated as optional equalities.
fn scan_faces(g: &DMatrix<f64>, scale: f64, forced: impl Fn(&[usize]) -> Vec<usize>) -> Option<DVector<f64>> {
    // unit rows make the feasibility tolerance relative; the floor keeps
    // rows that are pure roundoff (v - s near a tied entry) from becoming cuts
    let mut g = g.clone();
    let floor = 1e-4 * scale;
    for mut row in g.row_iter_mut() {
        let m = row.amax().max(floor);
        if m > 0.0 {
            row /= m;
        }
    }
    let g = &g;
    let (rows, n) = g.shape();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        let tight = forced(&cols);
        let optional: Vec<usize> = (0..rows).filter(|k| !tight.contains(k)).collect();
        for sub in 0u32..(1 << optional.len()) {
            let mut eq_rows = tight.clone();
            eq_rows.extend(optional.iter().enumerate().filter(|(a, _)| sub >> a & 1 == 1).map(|(_, &k)| k));
            let mut e = DMatrix::zeros(eq_rows.len() + 1, cols.len());
            let mut b = DVector::zeros(eq_rows.len() + 1);
            e.row_mut(0).fill(1.0);
            b[0] = 1.0;
            for (a, &k) in eq_rows.iter().enumerate() {
                for (c, &j) in cols.iter().enumerate() {
                    e[(a + 1, c)] = g[(k, j)];
                }
            }
            let Some(x) = face_maxent(&e, &b) else { continue };
            let mut p = DVector::zeros(n);
            for (c, &j) in cols.iter().enumerate() {
                p[j] = x[c];
            }
            if (g * &p).max() > FEASIBILITY_TOL {
                continue;
            }
            let h = entropy(&p);
            if best.as_ref().is_none_or(|(bh, _)| h > *bh) {
                best = Some((h, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// Maxent Nash of an antisymmetric matrix by exhaustive face enumeration.
pub fn brute_force_maxent_oracle(a: &DMatrix<f64>) -> Result<NashEvaluationAvA> {
    let a = repair_antisymmetric(a)?;
    let n = a.nrows();
    if n > ORACLE_MAX_PLAYERS {
        return Err(Error::TooLarge { n, limit: ORACLE_MAX_PLAYERS });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    // p^T A p = 0 forces (A p)_i = 0 on the support
    let p = scan_faces(&a, a.amax(), |cols| cols.to_vec()).ok_or_else(|| Error::Solver("no feasible face found".into()))?;
    let nash_average = &a * &p;
    let exploitability = nash_average.max().max(0.0);
    Ok(NashEvaluationAvA {
        entropy: entropy(&p),
        support: support_of(&p),
        distribution: p,
        nash_average,
        exploitability,
        iterations: 0,
        residual: exploitability,
    })
}

/// Equalising strategy on `rows` making every column of `cols` pay the same,
/// with that payoff, when it is unique.
fn equalizer(s: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Option<(DVector<f64>, f64)> {
    // unknowns: x over rows, then v; equations: (S^T x)_j - v = 0, sum x = 1
    let k = rows.len();
    let mut e = DMatrix::zeros(cols.len() + 1, k + 1);
    let mut b = DVector::zeros(cols.len() + 1);
    for (a, &j) in cols.iter().enumerate() {
        for (c, &i) in rows.iter().enumerate() {
            e[(a, c)] = s[(i, j)];
        }
        e[(a, k)] = -1.0;
    }
    for c in 0..k {
        e[(cols.len(), c)] = 1.0;
    }
    b[cols.len()] = 1.0;
    let svd = thin_svd(&e).ok()?;
    let rank = svd.rank(1e-10, 1.0);
    if rank < k + 1 {
        return None;
    }
    let sol = svd.solve(&b, rank);
    if (&e * &sol - &b).amax() > 1e-9 * (1.0 + s.amax()) {
        return None;
    }
    if sol.rows(0, k).iter().any(|&v| v < -1e-12) {
        return None;
    }
    let mut x = DVector::zeros(s.nrows());
    for (c, &i) in rows.iter().enumerate() {
        x[i] = sol[c].max(0.0);
    }
    Some((x, sol[k]))
}

/// Value of the zero-sum game on `S` (rows maximise) by support-pair
/// enumeration.
pub fn support_enumeration_value(s: &DMatrix<f64>) -> Result<f64> {
    let (m, n) = s.shape();
    if m > ORACLE_MAX_SIDE || n > ORACLE_MAX_SIDE {
        return Err(Error::TooLarge { n: m.max(n), limit: ORACLE_MAX_SIDE });
    }
    let mut best = f64::NEG_INFINITY;
    for rmask in 1u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|&i| rmask >> i & 1 == 1).collect();
        for cmask in 1u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|&j| cmask >> j & 1 == 1).collect();
            if let Some((x, _)) = equalizer(s, &rows, &cols) {
                let guaranteed = (s.transpose() * &x).min();
                best = best.max(guaranteed);
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Solver("no equalising strategy found".into()))
    }
}

/// Maxent Nash of the zero-sum game on `S` from the support-enumeration value
/// and a face scan of each side's optimal polytope.
pub fn brute_force_avt_oracle(s: &DMatrix<f64>) -> Result<NashEvaluationAvT> {
    let (m, n) = s.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty score matrix".into()));
    }
    let v = support_enumeration_value(s)?;
    // agents: (S^T p_a)_j >= v; tasks: (S p_e)_i <= v
    let g_agent = DMatrix::from_fn(n, m, |j, i| v - s[(i, j)]);
    let g_task = DMatrix::from_fn(m, n, |i, j| s[(i, j)] - v);
    let scale = s.amax().max(v.abs());
    let pa = scan_faces(&g_agent, scale, |_| Vec::new()).ok_or_else(|| Error::Solver("agent polytope scan failed".into()))?;
    let pe = scan_faces(&g_task, scale, |_| Vec::new()).ok_or_else(|| Error::Solver("task polytope scan failed".into()))?;
    Ok(NashEvaluationAvT::from_parts(s, pa, pe, v, 0, 0.0))
}
