//! Hüsler–Reiss family parameterised by a strictly conditionally negative
//! definite matrix Λ = (λ²_ij).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::linalg::{hr_r_matrix, spd_log_det, submatrix};
use crate::numerics::mvn::mvn_cdf;
use crate::numerics::normal::{log_norm_cdf, LN_SQRT_2PI};
use crate::numerics::RngStream;
use crate::partitions::SubsetIndicator;

/// Accuracy requested from each multivariate normal CDF call.
pub const DEFAULT_CDF_EPS: f64 = 1e-7;

/// Anchor-specific quantities for one block S, anchor i₀ = min(S).
#[derive(Debug, Clone)]
struct BlockPlan {
    anchor: usize,
    /// S ∖ {i₀}
    tau: Vec<usize>,
    /// complement of S
    comp: Vec<usize>,
    /// R_ττ⁻¹
    tau_inv: DMatrix<f64>,
    tau_log_det: f64,
    /// R_cτ R_ττ⁻¹
    cond_coef: DMatrix<f64>,
    cond_cov: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct HueslerReiss {
    lambda2: DMatrix<f64>,
    /// Cholesky factors of R^(j), for sampling
    chol: Vec<DMatrix<f64>>,
    plans: Vec<Option<BlockPlan>>,
    cdf_eps: f64,
}

impl HueslerReiss {
    pub fn new(lambda2: &DMatrix<f64>) -> Result<Self> {
        let k = lambda2.nrows();
        let mut chol = Vec::with_capacity(k);
        let mut r_mats = Vec::with_capacity(k);
        for j in 0..k {
            let r = hr_r_matrix(lambda2, j);
            let c = if k > 1 {
                r.clone()
                    .cholesky()
                    .ok_or(Error::NotConditionallyNegativeDefinite)?
                    .unpack()
            } else {
                DMatrix::zeros(0, 0)
            };
            chol.push(c);
            r_mats.push(r);
        }
        let size = 1usize << k;
        let mut plans = vec![None; size];
        for (bits, slot) in plans.iter_mut().enumerate().skip(1) {
            let s = SubsetIndicator::from_bits_unchecked(bits as u32);
            let pos = s.positions();
            let anchor = pos[0];
            // R^(anchor) is indexed by the other coordinates in order
            let idx_of = |j: usize| if j < anchor { j } else { j - 1 };
            let tau: Vec<usize> = pos[1..].to_vec();
            let comp: Vec<usize> = (0..k).filter(|&j| bits & (1 << j) == 0).collect();
            let r = &r_mats[anchor];
            let ti: Vec<usize> = tau.iter().map(|&j| idx_of(j)).collect();
            let ci: Vec<usize> = comp.iter().map(|&j| idx_of(j)).collect();
            let r_tt = submatrix(r, &ti, &ti);
            let r_ct = submatrix(r, &ci, &ti);
            let r_cc = submatrix(r, &ci, &ci);
            let (tau_inv, tau_log_det) = if ti.is_empty() {
                (DMatrix::zeros(0, 0), 0.0)
            } else {
                let c = r_tt.clone().cholesky().ok_or(Error::NotConditionallyNegativeDefinite)?;
                (c.inverse(), spd_log_det(&r_tt)?)
            };
            let cond_coef = &r_ct * &tau_inv;
            let mut cond_cov = &r_cc - &cond_coef * r_ct.transpose();
            cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;
            *slot = Some(BlockPlan { anchor, tau, comp, tau_inv, tau_log_det, cond_coef, cond_cov });
        }
        Ok(Self { lambda2: lambda2.clone(), chol, plans, cdf_eps: DEFAULT_CDF_EPS })
    }

    pub fn dim(&self) -> usize {
        self.lambda2.nrows()
    }

    pub fn lambda2(&self) -> &DMatrix<f64> {
        &self.lambda2
    }

    pub fn with_cdf_eps(mut self, eps: f64) -> Self {
        self.cdf_eps = eps;
        self
    }

    /// z*_j = log(z_j / z_{i₀}) + 2λ²_{j,i₀}, +∞ when z_j is.
    fn z_star(&self, z: &[f64], anchor: usize, j: usize) -> f64 {
        if z[j].is_infinite() {
            f64::INFINITY
        } else {
            (z[j] / z[anchor]).ln() + 2.0 * self.lambda2[(j, anchor)]
        }
    }

    /// log of the Gaussian CDF factor; infinite limits are marginalised.
    fn log_cdf(&self, upper: &[f64], cov: &DMatrix<f64>) -> Result<f64> {
        match upper.len() {
            0 => Ok(0.0),
            1 => Ok(log_norm_cdf(upper[0] / cov[(0, 0)].sqrt())),
            _ => {
                let r = mvn_cdf(upper, cov, self.cdf_eps)?;
                if !r.converged {
                    return Err(Error::CdfNotConverged { estimate: r.value, error: r.error_estimate });
                }
                Ok(r.value.ln())
            }
        }
    }

    pub fn exponent(&self, z: &[f64]) -> Result<f64> {
        let k = self.dim();
        let mut v = 0.0;
        for i in 0..k {
            if z[i].is_infinite() {
                continue;
            }
            // z_i D_{i}(z) = z_i^{-1} Φ_{k-1}(...)
            v += (self.log_block(z, SubsetIndicator::from_bits_unchecked(1 << i))? + z[i].ln()).exp();
        }
        Ok(v)
    }

    pub(crate) fn log_block(&self, z: &[f64], s: SubsetIndicator) -> Result<f64> {
        let plan = self.plans[s.bits() as usize].as_ref().expect("plan for every subset");
        let a = plan.anchor;
        let zt = DVector::from_iterator(plan.tau.len(), plan.tau.iter().map(|&j| self.z_star(z, a, j)));
        let mut log_d = -2.0 * z[a].ln() - plan.tau.iter().map(|&j| z[j].ln()).sum::<f64>();
        if !plan.tau.is_empty() {
            let quad = zt.dot(&(&plan.tau_inv * &zt));
            log_d += -0.5 * quad - plan.tau.len() as f64 * LN_SQRT_2PI - 0.5 * plan.tau_log_det;
        }
        if !plan.comp.is_empty() {
            let mean = &plan.cond_coef * &zt;
            let upper: Vec<f64> = plan
                .comp
                .iter()
                .enumerate()
                .map(|(c, &j)| self.z_star(z, a, j) - mean[c])
                .collect();
            log_d += self.log_cdf(&upper, &plan.cond_cov)?;
        }
        Ok(log_d)
    }

    /// log Y_{-j} ~ N(−2λ²_{j,−j}, R^(j)), Y_j = 1.
    pub(crate) fn sample_pj(&self, j: usize, rng: &mut RngStream) -> Vec<f64> {
        let k = self.dim();
        let l = &self.chol[j];
        let g: Vec<f64> = (0..k - 1).map(|_| rng.standard_normal()).collect();
        let others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
        let mut y = vec![1.0; k];
        for (a, &i) in others.iter().enumerate() {
            let x: f64 = (0..=a).map(|b| l[(a, b)] * g[b]).sum();
            y[i] = (x - 2.0 * self.lambda2[(j, i)]).exp();
        }
        y
    }
}
