//! Extremal-t family with correlation matrix Σ and degrees of freedom ν.
//!
//! The exponent measure is that of `max(0, T)^ν` for a Student-t vector T,
//! so every face of the simplex carries mass. On the face I with d members
//! the density is the d-dimensional interior density with Σ_II times the
//! conditional probability that the remaining t-coordinates are negative.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::face_quad::{self, FaceDensity};
use crate::error::Result;
use crate::numerics::linalg::{spd_log_det, submatrix};
use crate::numerics::mvn::bvn_cdf;
use crate::numerics::normal::student_t_cdf;
use crate::numerics::quadrature::{integrate_1d, Tolerance};
use crate::numerics::RngStream;
use crate::partitions::SubsetIndicator;

pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct FacePlan {
    members: Vec<usize>,
    comp: Vec<usize>,
    inv: DMatrix<f64>,
    log_const: f64,
    /// Σ_cI Σ_II⁻¹
    cond_coef: DMatrix<f64>,
    /// standard deviations and correlation of Σ_cc − Σ_cI Σ_II⁻¹ Σ_Ic
    cond_sd: Vec<f64>,
    cond_rho: f64,
}

#[derive(Debug, Clone)]
pub struct ExtremalT {
    sigma: DMatrix<f64>,
    nu: f64,
    faces: Vec<Option<FacePlan>>,
    /// Cholesky factors of the conditional scale given coordinate j
    pj_chol: Vec<DMatrix<f64>>,
    rel_tol: f64,
}

impl ExtremalT {
    pub fn new(sigma: &DMatrix<f64>, nu: f64) -> Result<Self> {
        let k = sigma.nrows();
        let size = 1usize << k;
        let mut faces = vec![None; size];
        for (bits, slot) in faces.iter_mut().enumerate().skip(1) {
            let members: Vec<usize> = (0..k).filter(|i| bits & (1 << i) != 0).collect();
            let comp: Vec<usize> = (0..k).filter(|i| bits & (1 << i) == 0).collect();
            let d = members.len() as f64;
            let s_ii = submatrix(sigma, &members, &members);
            let inv = s_ii
                .clone()
                .cholesky()
                .ok_or_else(|| crate::Error::NotPositiveDefinite("sigma".into()))?
                .inverse();
            let log_const = (1.0 - d) / 2.0 * std::f64::consts::PI.ln() - ln_gamma((nu + 1.0) / 2.0)
                + ln_gamma((d + nu) / 2.0)
                + (1.0 - d) * nu.ln()
                - 0.5 * spd_log_det(&s_ii)?;
            let s_ci = submatrix(sigma, &comp, &members);
            let cond_coef = &s_ci * &inv;
            let cond = submatrix(sigma, &comp, &comp) - &cond_coef * s_ci.transpose();
            let cond_sd: Vec<f64> = (0..comp.len()).map(|i| cond[(i, i)].sqrt()).collect();
            let cond_rho = if comp.len() == 2 { cond[(0, 1)] / (cond_sd[0] * cond_sd[1]) } else { 0.0 };
            *slot = Some(FacePlan { members, comp, inv, log_const, cond_coef, cond_sd, cond_rho });
        }
        let mut pj_chol = Vec::with_capacity(k);
        for j in 0..k {
            let others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
            let s_oo = submatrix(sigma, &others, &others);
            let s_oj = submatrix(sigma, &others, &[j]);
            let scale = (s_oo - &s_oj * s_oj.transpose()) / (nu + 1.0);
            let l = if others.is_empty() {
                DMatrix::zeros(0, 0)
            } else {
                scale
                    .cholesky()
                    .ok_or_else(|| crate::Error::NotPositiveDefinite("conditional scale".into()))?
                    .unpack()
            };
            pj_chol.push(l);
        }
        Ok(Self { sigma: sigma.clone(), nu, faces, pj_chol, rel_tol: DEFAULT_REL_TOL })
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn exponent(&self, z: &[f64]) -> Result<f64> {
        face_quad::exponent(self, z)
    }

    pub(crate) fn block(&self, z: &[f64], s: SubsetIndicator) -> Result<f64> {
        face_quad::block(self, z, s.bits())
    }

    /// `Y_i = max(0, T_i)^ν` with `T_{−j}` Student-t on ν+1 degrees of
    /// freedom, location Σ_{−j,j}, scale (Σ_{−j,−j} − Σ_{−j,j}Σ_{j,−j})/(ν+1).
    pub(crate) fn sample_pj(&self, j: usize, rng: &mut RngStream) -> Vec<f64> {
        let k = self.dim();
        let l = &self.pj_chol[j];
        let g: Vec<f64> = (0..k - 1).map(|_| rng.standard_normal()).collect();
        let w = rng.gamma((self.nu + 1.0) / 2.0) * 2.0 / (self.nu + 1.0);
        let others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
        let mut y = vec![1.0; k];
        for (a, &i) in others.iter().enumerate() {
            let x: f64 = (0..=a).map(|b| l[(a, b)] * g[b]).sum();
            let t = self.sigma[(i, j)] + x / w.sqrt();
            y[i] = t.max(0.0).powf(self.nu);
        }
        y
    }

    /// P(T ≤ a) for a centred bivariate t with `dof` degrees of freedom,
    /// unit scales and correlation `rho`, as a χ² mixture of normal CDFs.
    fn bivariate_t_cdf(&self, a: [f64; 2], rho: f64, dof: f64) -> Result<f64> {
        let half = dof / 2.0;
        let log_norm = -half * 2f64.ln() - ln_gamma(half);
        let lo = -80.0 / dof - 10.0;
        let hi = (dof + 100.0 + 20.0 * dof.sqrt()).ln();
        let f = |t: f64| {
            let s = t.exp();
            let c = (s / dof).sqrt();
            let dens = (log_norm + half * t - 0.5 * s).exp();
            bvn_cdf(a[0] * c, a[1] * c, rho) * dens
        };
        Ok(integrate_1d(f, lo, hi, Tolerance::new(1e-14, 1e-11))?.value)
    }
}

impl FaceDensity for ExtremalT {
    fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    fn log_face_density(&self, y: &[f64], face: u32) -> Result<f64> {
        let plan = self.faces[face as usize].as_ref().expect("plan for every face");
        let nu = self.nu;
        let d = plan.members.len() as f64;
        let x = DVector::from_iterator(plan.members.len(), plan.members.iter().map(|&i| y[i].powf(1.0 / nu)));
        let q = x.dot(&(&plan.inv * &x));
        let mut l = plan.log_const - (d + nu) / 2.0 * q.ln()
            + (1.0 - nu) / nu * plan.members.iter().map(|&i| y[i].ln()).sum::<f64>();
        if !plan.comp.is_empty() {
            let dof = nu + d;
            let mu = &plan.cond_coef * &x;
            let scale = (dof / q).sqrt();
            let a: Vec<f64> = (0..plan.comp.len()).map(|c| -mu[c] * scale / plan.cond_sd[c]).collect();
            let p = match a.len() {
                1 => student_t_cdf(a[0], dof),
                2 => self.bivariate_t_cdf([a[0], a[1]], plan.cond_rho, dof)?,
                n => return Err(crate::Error::DimensionTooLarge { dim: n + plan.members.len(), max: 3 }),
            };
            l += p.ln();
        }
        Ok(l)
    }

    fn has_lower_faces(&self) -> bool {
        true
    }

    fn depth(&self) -> f64 {
        40.0 * self.nu.max(1.0)
    }

    fn rel_tol(&self, box_dim: usize) -> f64 {
        if box_dim <= 1 {
            self.rel_tol * 1e-2
        } else {
            self.rel_tol
        }
    }
}
