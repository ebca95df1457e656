//! Dirichlet family: angular density of a rescaled Dirichlet law, no mass on
//! the boundary of the simplex. V and its block derivatives by quadrature.

use statrs::function::gamma::ln_gamma;

use super::face_quad::{self, FaceDensity};
use crate::error::Result;
use crate::numerics::RngStream;
use crate::partitions::SubsetIndicator;

pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Dirichlet {
    alpha: Vec<f64>,
    /// log Γ(1 + Σα) + Σ (log α_i − log Γ(α_i) + (α_i − 1) log α_i)
    log_const: f64,
    rel_tol: f64,
}

impl Dirichlet {
    pub fn new(alpha: Vec<f64>) -> Self {
        let total: f64 = alpha.iter().sum();
        let log_const = ln_gamma(1.0 + total)
            + alpha
                .iter()
                .map(|&a| a.ln() - ln_gamma(a) + (a - 1.0) * a.ln())
                .sum::<f64>();
        Self { alpha, log_const, rel_tol: DEFAULT_REL_TOL }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// log λ(z) on the interior:
    /// `Γ(1+Σα) q^{-k-1} Π (α_i/Γ(α_i)) (α_i z_i/q)^{α_i−1}`, `q = Σ α_i z_i`.
    pub fn log_density(&self, z: &[f64]) -> f64 {
        let k = self.dim() as f64;
        let q: f64 = self.alpha.iter().zip(z).map(|(a, x)| a * x).sum();
        let lq = q.ln();
        let mut l = self.log_const - (k + 1.0) * lq;
        for (a, x) in self.alpha.iter().zip(z) {
            l += (a - 1.0) * (x.ln() - lq);
        }
        l
    }

    pub fn exponent(&self, z: &[f64]) -> Result<f64> {
        face_quad::exponent(self, z)
    }

    pub(crate) fn block(&self, z: &[f64], s: SubsetIndicator) -> Result<f64> {
        face_quad::block(self, z, s.bits())
    }

    /// X_j ~ Gamma(α_j + 1), X_i ~ Gamma(α_i), Y_i = (X_i/α_i) / (X_j/α_j).
    pub(crate) fn sample_pj(&self, j: usize, rng: &mut RngStream) -> Vec<f64> {
        let xj = rng.gamma(self.alpha[j] + 1.0) / self.alpha[j];
        (0..self.dim())
            .map(|i| if i == j { 1.0 } else { rng.gamma(self.alpha[i]) / self.alpha[i] / xj })
            .collect()
    }
}

impl FaceDensity for Dirichlet {
    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn log_face_density(&self, y: &[f64], face: u32) -> Result<f64> {
        let full = (1u32 << self.alpha.len()) - 1;
        Ok(if face == full { self.log_density(y) } else { f64::NEG_INFINITY })
    }

    fn has_lower_faces(&self) -> bool {
        false
    }

    fn depth(&self) -> f64 {
        let amin = self.alpha.iter().copied().fold(f64::INFINITY, f64::min);
        40.0 / amin.min(1.0)
    }

    fn rel_tol(&self, box_dim: usize) -> f64 {
        if box_dim <= 1 {
            self.rel_tol * 1e-2
        } else {
            self.rel_tol
        }
    }
}
