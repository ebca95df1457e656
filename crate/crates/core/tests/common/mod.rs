#![allow(dead_code)]

use maxstable::models::Model;
use maxstable::numerics::normal::{norm_cdf, student_t_cdf};
use maxstable::numerics::quadrature::{integrate_1d, Tolerance};
use maxstable::partitions::SubsetIndicator;
use maxstable::ParamVector;
use nalgebra::DMatrix;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn subset(bits: u32) -> SubsetIndicator {
    SubsetIndicator::from_indices(
        &(0..32).filter(|b| bits & (1 << b) != 0).map(|b| b + 1).collect::<Vec<_>>(),
        32 - bits.leading_zeros() as usize,
    )
    .unwrap()
}

/// −∂V/∂z_i by a central difference with relative step h.
pub fn fd_first_block(m: &Model, z: &[f64], i: usize, h: f64) -> f64 {
    let step = h * z[i];
    let mut up = z.to_vec();
    let mut dn = z.to_vec();
    up[i] += step;
    dn[i] -= step;
    -(m.exponent(&up).unwrap() - m.exponent(&dn).unwrap()) / (2.0 * step)
}

/// ∂/∂z_j of D_{S∖{j}}, which equals D_S.
pub fn fd_block_step(m: &Model, z: &[f64], s_minus_j: u32, j: usize, h: f64) -> f64 {
    let step = h * z[j];
    let mut up = z.to_vec();
    let mut dn = z.to_vec();
    up[j] += step;
    dn[j] -= step;
    let s = subset(s_minus_j);
    (m.block_derivative(&up, s).unwrap() - m.block_derivative(&dn, s).unwrap()) / (2.0 * step)
}

/// −∂_S V by a tensor of central differences.
pub fn fd_mixed_block(m: &Model, z: &[f64], bits: u32, h: f64) -> f64 {
    let idx: Vec<usize> = (0..z.len()).filter(|i| bits & (1 << i) != 0).collect();
    let mut total = 0.0;
    for signs in 0..(1u32 << idx.len()) {
        let mut x = z.to_vec();
        let mut sign = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            if signs & (1 << a) != 0 {
                x[i] += h * z[i];
            } else {
                x[i] -= h * z[i];
                sign = -sign;
            }
        }
        total += sign * m.exponent(&x).unwrap();
    }
    let denom: f64 = idx.iter().map(|&i| 2.0 * h * z[i]).product();
    -total / denom
}

/// Bivariate Hüsler–Reiss exponent function.
pub fn hr2_exponent(lambda2: f64, z1: f64, z2: f64) -> f64 {
    let a = 2.0 * lambda2.sqrt();
    norm_cdf(a / 2.0 + (z2 / z1).ln() / a) / z1 + norm_cdf(a / 2.0 + (z1 / z2).ln() / a) / z2
}

/// Bivariate extremal-t exponent function.
pub fn ext_t2_exponent(rho: f64, nu: f64, z1: f64, z2: f64) -> f64 {
    let b = ((nu + 1.0) / (1.0 - rho * rho)).sqrt();
    student_t_cdf(b * ((z2 / z1).powf(1.0 / nu) - rho), nu + 1.0) / z1
        + student_t_cdf(b * ((z1 / z2).powf(1.0 / nu) - rho), nu + 1.0) / z2
}

/// Dirichlet exponent function as E max_i X_i/(α_i z_i), X_i ~ Gamma(α_i):
/// ∫_0^∞ [1 − Π_i P(α_i, α_i z_i t)] dt.
pub fn dirichlet_gamma_oracle(alpha: &[f64], z: &[f64]) -> f64 {
    use statrs::function::gamma::gamma_lr;
    let f = |u: f64| {
        // t = u/(1-u)
        let t = u / (1.0 - u);
        let prod: f64 = alpha.iter().zip(z).map(|(a, zi)| gamma_lr(*a, a * zi * t)).product();
        (1.0 - prod) / (1.0 - u).powi(2)
    };
    integrate_1d(f, 0.0, 1.0 - 1e-12, Tolerance::new(1e-12, 1e-11)).unwrap().value
}

pub fn hr_params(k: usize) -> ParamVector {
    // Brown–Resnick on a line, γ(h) = |h|
    let t: [f64; 4] = [0.0, 1.0, 3.0, 4.5];
    let l = DMatrix::from_fn(k, k, |i, j| (t[i] - t[j]).abs() / 4.0);
    ParamVector::huesler_reiss(l).unwrap()
}

pub fn ext_t_params(k: usize, nu: f64) -> ParamVector {
    let full = [[1.0, 0.5, 0.2], [0.5, 1.0, -0.3], [0.2, -0.3, 1.0]];
    let s = DMatrix::from_fn(k, k, |i, j| full[i][j]);
    ParamVector::extremal_t(s, nu).unwrap()
}
