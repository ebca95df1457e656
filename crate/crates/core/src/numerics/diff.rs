//! Central finite differences.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default relative step for gradients.
pub const GRAD_STEP: f64 = 1e-5;

fn step(x: f64, h: Option<f64>) -> f64 {
    h.unwrap_or(GRAD_STEP * x.abs().max(1.0))
}

/// Central-difference gradient. With `h = None` the step for coordinate i is
/// `1e-5 · max(1, |x_i|)`.
pub fn finite_diff_gradient<G>(g: G, x: &[f64], h: Option<f64>) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let mut xp = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let hi = step(x[i], h);
        xp[i] = x[i] + hi;
        let up = g(&xp)?;
        xp[i] = x[i] - hi;
        let down = g(&xp)?;
        xp[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!("function value near coordinate {i}")));
        }
        grad.push((up - down) / (2.0 * hi));
    }
    Ok(grad)
}

/// Central-difference Jacobian of a vector function, one row per output.
pub fn finite_diff_jacobian<G>(g: G, x: &[f64], h: Option<f64>) -> Result<DMatrix<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut xp = x.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let hi = step(x[i], h);
        xp[i] = x[i] + hi;
        let up = g(&xp)?;
        xp[i] = x[i] - hi;
        let down = g(&xp)?;
        xp[i] = x[i];
        let col: Vec<f64> = up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * hi)).collect();
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("jacobian column {i}")));
        }
        cols.push(col);
    }
    let m = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(m, x.len(), |r, c| cols[c][r]))
}

/// Central-difference Hessian with a fixed absolute step `h`.
pub fn finite_diff_hessian<G>(g: G, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let d = x.len();
    let mut hess = DMatrix::zeros(d, d);
    let f0 = g(x)?;
    let mut xp = x.to_vec();
    let eval = |xp: &mut Vec<f64>, moves: &[(usize, f64)]| -> Result<f64> {
        for &(i, s) in moves {
            xp[i] += s;
        }
        let v = g(xp);
        for &(i, s) in moves {
            xp[i] -= s;
        }
        let v = v?;
        if !v.is_finite() {
            return Err(Error::NonFinite("function value in hessian stencil".into()));
        }
        Ok(v)
    };
    for i in 0..d {
        let up = eval(&mut xp, &[(i, h)])?;
        let down = eval(&mut xp, &[(i, -h)])?;
        hess[(i, i)] = (up - 2.0 * f0 + down) / (h * h);
        for j in 0..i {
            let pp = eval(&mut xp, &[(i, h), (j, h)])?;
            let pm = eval(&mut xp, &[(i, h), (j, -h)])?;
            let mp = eval(&mut xp, &[(i, -h), (j, h)])?;
            let mm = eval(&mut xp, &[(i, -h), (j, -h)])?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}
