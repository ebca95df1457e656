//! Block derivatives, exponent function and angular integrals for families
//! known only through their exponent-measure densities λ_I.
//!
//! `D_S(z) = Σ_{J ⊆ Sᶜ} ∫_{(0, z_J)} λ_{S∪J}(z_S, y_J) dy_J` and
//! `V(z) = Σ_i z_i D_{i}(z)`. Each `y_j` is written `c_j e^{t_j}` so the
//! integrable singularities at zero become exponential tails in `t`.

use std::cell::RefCell;

use super::MAX_QUADRATURE_DIM;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_box, Tolerance};

pub(crate) trait FaceDensity {
    fn dim(&self) -> usize;
    /// log λ_I(y), reading only the coordinates in `face`.
    fn log_face_density(&self, y: &[f64], face: u32) -> Result<f64>;
    /// Whether proper faces carry mass.
    fn has_lower_faces(&self) -> bool;
    /// Truncation depth in log coordinates.
    fn depth(&self) -> f64;
    /// Relative tolerance for an integral over `box_dim` coordinates.
    fn rel_tol(&self, box_dim: usize) -> f64;
}

fn positions(bits: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|i| bits & (1 << i) != 0).collect()
}

fn check_dim(k: usize) -> Result<()> {
    if k > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge { dim: k, max: MAX_QUADRATURE_DIM });
    }
    Ok(())
}

pub(crate) fn block<M: FaceDensity>(m: &M, z: &[f64], s: u32) -> Result<f64> {
    let k = m.dim();
    check_dim(k)?;
    let in_s = positions(s, k);
    if in_s.iter().any(|&i| z[i].is_infinite()) {
        return Ok(0.0);
    }
    let zref = in_s.iter().map(|&i| z[i]).fold(f64::INFINITY, f64::min);
    let full = (1u32 << k) - 1;
    let comp = full & !s;
    let depth = m.depth();
    let mut total = 0.0;
    // enumerate J ⊆ comp
    let mut j_bits = comp;
    loop {
        if m.has_lower_faces() || j_bits == comp {
            let face = s | j_bits;
            if j_bits == 0 {
                total += m.log_face_density(z, face)?.exp();
            } else {
                let js = positions(j_bits, k);
                let mut lo = Vec::with_capacity(js.len());
                let mut hi = Vec::with_capacity(js.len());
                let mut scale = Vec::with_capacity(js.len());
                for &j in &js {
                    if z[j].is_finite() {
                        lo.push(-depth);
                        hi.push(0.0);
                        scale.push(z[j]);
                    } else {
                        lo.push(-depth);
                        hi.push(depth);
                        scale.push(zref);
                    }
                }
                let failure = RefCell::new(None);
                let mut y = z.to_vec();
                let integrand = |t: &[f64]| -> f64 {
                    let mut log_jac = 0.0;
                    for (a, &j) in js.iter().enumerate() {
                        let ly = scale[a].ln() + t[a];
                        y[j] = ly.exp();
                        log_jac += ly;
                    }
                    match m.log_face_density(&y, face) {
                        Ok(l) => (l + log_jac).exp(),
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                };
                let tol = Tolerance::new(1e-300, m.rel_tol(js.len()));
                let r = integrate_box(integrand, &lo, &hi, tol)?;
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                total += r.value;
            }
        }
        if j_bits == 0 {
            break;
        }
        j_bits = (j_bits - 1) & comp;
    }
    Ok(total)
}

pub(crate) fn exponent<M: FaceDensity>(m: &M, z: &[f64]) -> Result<f64> {
    let k = m.dim();
    check_dim(k)?;
    let mut v = 0.0;
    for i in 0..k {
        if z[i].is_finite() {
            v += z[i] * block(m, z, 1 << i)?;
        }
    }
    Ok(v)
}

/// ∫ g(w) h_I(w) dw over the open face, via the additive-logistic map
/// `w = softmax(t, 0)` whose Jacobian is `Π_{i∈I} w_i`.
pub(crate) fn angular_integral<M: FaceDensity, G: Fn(&[f64]) -> f64>(
    m: &M,
    face: u32,
    g: G,
    rel_tol: f64,
) -> Result<f64> {
    let k = m.dim();
    check_dim(k)?;
    if face == 0 || face >= (1 << k) {
        return Err(Error::OutOfDomain(format!("face bits {face} invalid for k = {k}")));
    }
    let idx = positions(face, k);
    let d = idx.len();
    let ln_k = (k as f64).ln();
    if d == 1 {
        let mut w = vec![0.0; k];
        w[idx[0]] = 1.0;
        return Ok(g(&w) * (m.log_face_density(&w, face)? - ln_k).exp());
    }
    let depth = m.depth();
    let failure = RefCell::new(None);
    let mut w = vec![0.0; k];
    let integrand = |t: &[f64]| -> f64 {
        let mx = t.iter().copied().fold(0.0f64, f64::max);
        let lse = mx + ((-mx).exp() + t.iter().map(|x| (x - mx).exp()).sum::<f64>()).ln();
        let mut log_jac = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            let lw = if a + 1 < d { t[a] - lse } else { -lse };
            w[i] = lw.exp();
            log_jac += lw;
        }
        match m.log_face_density(&w, face) {
            Ok(l) => g(&w) * (l - ln_k + log_jac).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let lo = vec![-depth; d - 1];
    let hi = vec![depth; d - 1];
    let r = integrate_box(integrand, &lo, &hi, Tolerance::new(1e-300, rel_tol))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.value)
}
