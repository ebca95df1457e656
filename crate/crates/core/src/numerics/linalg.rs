//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalue floor separating "strictly" positive definite matrices.
pub const EIGEN_TOL: f64 = 1e-10;

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `R^(i)` of a Hüsler–Reiss matrix: entries `2(λ²_ij + λ²_im − λ²_jm)` over
/// `j, m ≠ i` (0-based `i`), in increasing index order.
pub fn hr_r_matrix(lambda2: &DMatrix<f64>, i: usize) -> DMatrix<f64> {
    let k = lambda2.nrows();
    let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
    DMatrix::from_fn(others.len(), others.len(), |a, b| {
        let (j, m) = (others[a], others[b]);
        2.0 * (lambda2[(i, j)] + lambda2[(i, m)] - lambda2[(j, m)])
    })
}

/// Strict conditional negative definiteness of a symmetric zero-diagonal
/// matrix, tested through positive definiteness of `R^(1)`.
pub fn check_cnd(lambda2: &DMatrix<f64>) -> Result<bool> {
    let k = lambda2.nrows();
    if k < 2 || lambda2.ncols() != k {
        return Err(Error::ShapeMismatch(format!(
            "check_cnd needs a k x k matrix with k >= 2, got {}x{}",
            lambda2.nrows(),
            lambda2.ncols()
        )));
    }
    Ok(min_eigenvalue(&hr_r_matrix(lambda2, 0)) > EIGEN_TOL)
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NotPositiveDefinite("matrix inverse".into()))
}

/// log-determinant of a symmetric positive definite matrix.
pub fn spd_log_det(m: &DMatrix<f64>) -> Result<f64> {
    let c = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("log-determinant".into()))?;
    Ok(2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Rows and columns `idx` of `m`.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
}

pub fn subvector(v: &[f64], idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}
