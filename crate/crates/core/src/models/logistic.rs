//! Symmetric logistic family, `V(z) = (Σ z_i^{-1/θ})^θ`.

use crate::numerics::RngStream;
use crate::partitions::SubsetIndicator;

#[derive(Debug, Clone)]
pub struct Logistic {
    dim: usize,
    theta: f64,
    /// log Π_{i=1}^{m-1} (i/θ − 1) for m = 1..=dim
    log_coef: Vec<f64>,
}

/// Per-point quantities shared by every block.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    /// log Σ z_i^{-1/θ}
    pub log_s: f64,
    /// Σ z_i^{-1/θ} log z_i / Σ z_i^{-1/θ}
    pub weighted_log_z: f64,
}

impl Logistic {
    pub fn new(dim: usize, theta: f64) -> Self {
        let mut log_coef = Vec::with_capacity(dim);
        let mut acc = 0.0;
        for m in 1..=dim {
            log_coef.push(acc);
            acc += (m as f64 / theta - 1.0).ln();
        }
        Self { dim, theta, log_coef }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub(crate) fn prepare(&self, z: &[f64]) -> Prepared {
        let a: Vec<f64> = z.iter().map(|x| -x.ln() / self.theta).collect();
        let mx = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return Prepared { log_s: f64::NEG_INFINITY, weighted_log_z: 0.0 };
        }
        let sum: f64 = a.iter().map(|x| (x - mx).exp()).sum();
        let log_s = mx + sum.ln();
        let weighted_log_z = z
            .iter()
            .zip(&a)
            .filter(|(x, _)| x.is_finite())
            .map(|(x, ai)| (ai - log_s).exp() * x.ln())
            .sum();
        Prepared { log_s, weighted_log_z }
    }

    pub fn exponent(&self, z: &[f64]) -> f64 {
        (self.theta * self.prepare(z).log_s).exp()
    }

    pub(crate) fn log_block_prepared(&self, pre: &Prepared, z: &[f64], s: SubsetIndicator) -> f64 {
        let m = s.len();
        let th = self.theta;
        let sum_log_z: f64 = s.positions().iter().map(|&i| z[i].ln()).sum();
        self.log_coef[m - 1] + (th - m as f64) * pre.log_s - (1.0 / th + 1.0) * sum_log_z
    }

    pub(crate) fn log_block(&self, z: &[f64], s: SubsetIndicator) -> f64 {
        self.log_block_prepared(&self.prepare(z), z, s)
    }

    /// ∂θ V(z) and, for every subset, ∂θ log D_S(z) (index 0 unused).
    pub(crate) fn theta_derivatives(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let pre = self.prepare(z);
        let th = self.theta;
        let v = (th * pre.log_s).exp();
        let dlog_v = pre.log_s + pre.weighted_log_z / th;
        let size = 1usize << self.dim;
        let mut dlog_d = vec![0.0; size];
        let log_z: Vec<f64> = z.iter().map(|x| x.ln()).collect();
        for (bits, slot) in dlog_d.iter_mut().enumerate().skip(1) {
            let s = SubsetIndicator::from_bits_unchecked(bits as u32);
            let m = s.len();
            let mf = m as f64;
            let coef: f64 = (1..m).map(|i| -(i as f64) / (i as f64 * th - th * th)).sum();
            let sum_log_z: f64 = s.positions().iter().map(|&i| log_z[i]).sum();
            *slot = coef + pre.log_s + (th - mf) / (th * th) * pre.weighted_log_z + sum_log_z / (th * th);
        }
        (v * dlog_v, dlog_d)
    }

    /// Spectral law anchored at j: `Y_i = (G/E_i)^θ` for i ≠ j with
    /// `G ~ Gamma(1−θ)` shared and `E_i` iid unit exponential.
    pub(crate) fn sample_pj(&self, j: usize, rng: &mut RngStream) -> Vec<f64> {
        let th = self.theta;
        let g = rng.gamma(1.0 - th);
        (0..self.dim)
            .map(|i| if i == j { 1.0 } else { (g / rng.exp1()).powf(th) })
            .collect()
    }
}
