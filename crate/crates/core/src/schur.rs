//! Thin real Schur factorisation of antisymmetric matrices.
//!
//! An antisymmetric `A` factors as `Q * L * Q^T` where `Q` has orthonormal
//! columns and `L` is block diagonal with `2x2` blocks `[[0, l], [-l, 0]]`.
//! The factorisation is computed from the SVD of `A`: singular values come in
//! equal pairs, and for a right singular vector `q1` with singular value `l`
//! the partner column is `q2 = -A q1 / l`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::hodge::repair_antisymmetric;
use crate::linalg::thin_svd;

/// Blocks whose magnitude is at most this fraction of the largest are dropped.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SchurFactors {
    /// `n x 2r` with orthonormal columns; columns `2j, 2j+1` span block `j`.
    pub basis: DMatrix<f64>,
    /// Block magnitudes, descending.
    pub pairs: Vec<f64>,
}

impl SchurFactors {
    pub fn rank(&self) -> usize {
        2 * self.pairs.len()
    }

    /// The `2r x 2r` block-diagonal middle factor.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let r = self.pairs.len();
        let mut l = DMatrix::zeros(2 * r, 2 * r);
        for (j, &lam) in self.pairs.iter().enumerate() {
            l[(2 * j, 2 * j + 1)] = lam;
            l[(2 * j + 1, 2 * j)] = -lam;
        }
        l
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.basis * self.block_matrix() * self.basis.transpose()
    }

    /// Rows of the basis restricted to one block: one point in the plane per player.
    pub fn block_coordinates(&self, block: usize) -> DMatrix<f64> {
        self.basis.columns(2 * block, 2).into_owned()
    }
}

pub fn schur_antisym(a: &DMatrix<f64>) -> Result<SchurFactors> {
    let a = repair_antisymmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(SchurFactors { basis: DMatrix::zeros(0, 0), pairs: Vec::new() });
    }
    let svd = thin_svd(&a)?;
    let v_t = &svd.v_t;
    let sigma_max = svd.s[0];
    if sigma_max == 0.0 {
        return Ok(SchurFactors { basis: DMatrix::zeros(n, 0), pairs: Vec::new() });
    }
    let kept: Vec<usize> = (0..svd.s.len()).filter(|&k| svd.s[k] > RANK_CUTOFF * sigma_max).collect();
    let n_pairs = kept.len() / 2;

    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(2 * n_pairs);
    let mut pairs = Vec::with_capacity(n_pairs);
    for &k in &kept {
        if pairs.len() == n_pairs {
            break;
        }
        // Candidate from the right singular vectors; skip it if an earlier
        // block (same singular value) already covers its direction.
        let mut q1: DVector<f64> = v_t.row(k).transpose();
        for c in &cols {
            let proj = c.dot(&q1);
            q1.axpy(-proj, c, 1.0);
        }
        let norm = q1.norm();
        if norm < 0.5 {
            continue;
        }
        q1 /= norm;
        let mut q2 = -(&a * &q1);
        for c in cols.iter().chain(std::iter::once(&q1)) {
            let proj = c.dot(&q2);
            q2.axpy(-proj, c, 1.0);
        }
        let lam = q2.norm();
        if lam <= RANK_CUTOFF * sigma_max {
            continue;
        }
        q2 /= lam;
        pairs.push(q1.dot(&(&a * &q2)));
        cols.push(q1);
        cols.push(q2);
    }
    // Equal singular values can come back in any order; keep blocks descending.
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.sort_by(|&x, &y| pairs[y].total_cmp(&pairs[x]));
    let basis = DMatrix::from_fn(n, 2 * idx.len(), |i, c| cols[2 * idx[c / 2] + c % 2][i]);
    let pairs = idx.iter().map(|&j| pairs[j]).collect();
    Ok(SchurFactors { basis, pairs })
}

/// Largest principal angle (radians) between the column spaces of two
/// matrices with orthonormal columns.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() || a.ncols() == 0 {
        return std::f64::consts::FRAC_PI_2;
    }
    // sin of the largest angle is the spectral norm of a's component outside span(b)
    let outside = a - b * (b.transpose() * a);
    let top = thin_svd(&outside).map(|svd| svd.s.iter().copied().fold(0.0, f64::max)).unwrap_or(1.0);
    top.min(1.0).asin()
}

/// Orthonormal basis for the column space of `m` (Gram-Schmidt, dropping
/// dependent columns).
pub fn orthonormal_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: DVector<f64> = m.column(j).into_owned();
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v.axpy(-p, c, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-12 * m.column(j).norm().max(1e-300) {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}
