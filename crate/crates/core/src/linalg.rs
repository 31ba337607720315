//! Thin SVD on nalgebra matrices, computed by faer.
//!
//! nalgebra's own SVD can return factors that do not reproduce the input on
//! small rank-deficient matrices, which is exactly what face and support
//! enumeration feed it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Svd {
    /// `m x k`
    pub u: DMatrix<f64>,
    /// Length `k = min(m, n)`, descending.
    pub s: DVector<f64>,
    /// `k x n`
    pub v_t: DMatrix<f64>,
}

impl Svd {
    /// Number of singular values above `rel * max(s_max, floor)`.
    pub fn rank(&self, rel: f64, floor: f64) -> usize {
        let cut = rel * self.s.iter().copied().fold(floor, f64::max);
        self.s.iter().filter(|&&v| v > cut).count()
    }

    /// Least-squares solution of `a x = b` through the first `rank` triplets.
    pub fn solve(&self, b: &DVector<f64>, rank: usize) -> DVector<f64> {
        let mut x = DVector::zeros(self.v_t.ncols());
        for k in 0..rank {
            let coef = self.u.column(k).dot(b) / self.s[k];
            x.axpy(coef, &self.v_t.row(k).transpose(), 1.0);
        }
        x
    }
}

pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd { u: DMatrix::zeros(m, 0), s: DVector::zeros(0), v_t: DMatrix::zeros(0, n) });
    }
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa.thin_svd().map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(Svd {
        u: DMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        s: DVector::from_fn(k, |i, _| s[i]),
        v_t: DMatrix::from_fn(k, n, |i, j| v[(j, i)]),
    })
}
