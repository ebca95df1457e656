//! The parametric families behind one interface: exponent function,
//! block derivatives `D_S = −∂_S V`, exponent-measure and angular densities,
//! and the spectral laws used for exact simulation.

mod dirichlet;
mod extremal_t;
mod face_quad;
mod huesler_reiss;
mod logistic;
pub mod spatial;

pub use dirichlet::Dirichlet;
pub use extremal_t::ExtremalT;
pub use huesler_reiss::HueslerReiss;
pub use logistic::Logistic;
pub use spatial::{map_spatial_params, SpatialConfig, SpatialFamily};

use serde::{Deserialize, Serialize};

use face_quad::FaceDensity;

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::params::{ModelId, ParamVector, Payload};
use crate::partitions::{SubsetIndicator, MAX_DIM};

/// Largest dimension for the quadrature-based families.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// A spectral vector anchored at coordinate `anchor` (0-based), where it
/// equals 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    pub y: Vec<f64>,
    pub anchor: usize,
}

/// A model instance with per-parameter precomputation done.
#[derive(Debug, Clone)]
pub enum Model {
    Logistic(Logistic),
    Dirichlet(Dirichlet),
    HueslerReiss(HueslerReiss),
    ExtremalT(ExtremalT),
}

impl Model {
    pub fn new(p: &ParamVector) -> Result<Self> {
        Ok(match p.payload() {
            Payload::Logistic { dim, theta } => Model::Logistic(Logistic::new(*dim, *theta)),
            Payload::Dirichlet { alpha } => Model::Dirichlet(Dirichlet::new(alpha.clone())),
            Payload::HueslerReiss { lambda2 } => Model::HueslerReiss(HueslerReiss::new(lambda2)?),
            Payload::ExtremalT { sigma, nu } => Model::ExtremalT(ExtremalT::new(sigma, *nu)?),
        })
    }

    pub fn model_id(&self) -> ModelId {
        match self {
            Model::Logistic(_) => ModelId::Logistic,
            Model::Dirichlet(_) => ModelId::Dirichlet,
            Model::HueslerReiss(_) => ModelId::HueslerReiss,
            Model::ExtremalT(_) => ModelId::ExtremalT,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Logistic(m) => m.dim(),
            Model::Dirichlet(m) => m.dim(),
            Model::HueslerReiss(m) => m.dim(),
            Model::ExtremalT(m) => m.dim(),
        }
    }

    /// V(z). Components may be `+inf`.
    pub fn exponent(&self, z: &[f64]) -> Result<f64> {
        self.check_point(z, true)?;
        match self {
            Model::Logistic(m) => Ok(m.exponent(z)),
            Model::Dirichlet(m) => m.exponent(z),
            Model::HueslerReiss(m) => m.exponent(z),
            Model::ExtremalT(m) => m.exponent(z),
        }
    }

    /// D_S(z) = −∂_S V(z) ≥ 0.
    pub fn block_derivative(&self, z: &[f64], s: SubsetIndicator) -> Result<f64> {
        self.check_point(z, false)?;
        self.check_subset(s)?;
        let v = match self {
            Model::Logistic(m) => m.log_block(z, s).exp(),
            Model::Dirichlet(m) => m.block(z, s)?,
            Model::HueslerReiss(m) => m.log_block(z, s)?.exp(),
            Model::ExtremalT(m) => m.block(z, s)?,
        };
        guard_sign(s, v)
    }

    /// log D_S(z) for every nonempty subset, indexed by subset bits; entry 0
    /// is unused.
    pub fn log_block_derivatives(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z, false)?;
        let k = self.dim();
        if k > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim: k, max: MAX_DIM });
        }
        let size = 1usize << k;
        let mut out = vec![0.0; size];
        match self {
            Model::Logistic(m) => {
                let pre = m.prepare(z);
                for (bits, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = m.log_block_prepared(&pre, z, SubsetIndicator::from_bits_unchecked(bits as u32));
                }
            }
            Model::HueslerReiss(m) => {
                for (bits, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = m.log_block(z, SubsetIndicator::from_bits_unchecked(bits as u32))?;
                }
            }
            Model::Dirichlet(_) | Model::ExtremalT(_) => {
                for (bits, slot) in out.iter_mut().enumerate().skip(1) {
                    let s = SubsetIndicator::from_bits_unchecked(bits as u32);
                    let v = match self {
                        Model::Dirichlet(m) => m.block(z, s)?,
                        Model::ExtremalT(m) => m.block(z, s)?,
                        _ => unreachable!(),
                    };
                    *slot = guard_sign(s, v)?.ln();
                }
            }
        }
        Ok(out)
    }

    /// Density λ_I of the exponent measure on the face `I`, at a point whose
    /// coordinates outside `I` are ignored.
    pub fn exponent_measure_density(&self, z: &[f64], face: SubsetIndicator) -> Result<f64> {
        self.check_subset(face)?;
        if z.len() != self.dim() {
            return Err(shape(self.dim(), z.len()));
        }
        if face.positions().iter().any(|&i| !(z[i] > 0.0 && z[i].is_finite())) {
            return Err(Error::NotOnFace);
        }
        match self {
            Model::Dirichlet(m) => m.log_face_density(z, face.bits()).map(f64::exp),
            Model::ExtremalT(m) => m.log_face_density(z, face.bits()).map(f64::exp),
            _ => Err(Error::UnsupportedModel(format!(
                "{} has no implemented angular density",
                self.model_id()
            ))),
        }
    }

    /// Angular density h_I(w) for w in the open face `I` of the unit simplex.
    pub fn angular_density(&self, w: &[f64], face: SubsetIndicator) -> Result<f64> {
        self.check_subset(face)?;
        let k = self.dim();
        if w.len() != k {
            return Err(shape(k, w.len()));
        }
        let on_face = (0..k).all(|i| {
            if face.contains(i + 1) {
                w[i] > 0.0 && w[i].is_finite()
            } else {
                w[i] == 0.0
            }
        }) && (w.iter().sum::<f64>() - 1.0).abs() < 1e-12;
        if !on_face {
            return Err(Error::NotOnFace);
        }
        Ok(self.exponent_measure_density(w, face)? / k as f64)
    }

    /// Draws from the spectral law P_j (0-based anchor j).
    pub fn sample_pj(&self, j: usize, rng: &mut RngStream) -> Result<SpectralFunction> {
        if j >= self.dim() {
            return Err(Error::OutOfDomain(format!("anchor {j} outside 0..{}", self.dim())));
        }
        let y = match self {
            Model::Logistic(m) => m.sample_pj(j, rng),
            Model::Dirichlet(m) => m.sample_pj(j, rng),
            Model::HueslerReiss(m) => m.sample_pj(j, rng),
            Model::ExtremalT(m) => m.sample_pj(j, rng),
        };
        Ok(SpectralFunction { y, anchor: j })
    }

    fn check_point(&self, z: &[f64], allow_inf: bool) -> Result<()> {
        let k = self.dim();
        if z.len() != k {
            return Err(shape(k, z.len()));
        }
        for (i, &x) in z.iter().enumerate() {
            if x.is_nan() || (!allow_inf && x.is_infinite()) {
                return Err(Error::NonFinite(format!("z[{i}]")));
            }
            if x <= 0.0 {
                return Err(Error::OutOfDomain(format!("z[{i}] = {x} must be positive")));
            }
        }
        Ok(())
    }

    fn check_subset(&self, s: SubsetIndicator) -> Result<()> {
        let k = self.dim();
        if s.is_empty() || (k < 32 && s.bits() >= (1u32 << k)) {
            return Err(Error::OutOfDomain(format!("subset {s} not within 1..={k}")));
        }
        Ok(())
    }
}

fn shape(k: usize, got: usize) -> Error {
    Error::ShapeMismatch(format!("expected a point of length {k}, got {got}"))
}

fn guard_sign(s: SubsetIndicator, v: f64) -> Result<f64> {
    if v < 0.0 || v.is_nan() {
        return Err(Error::NegativeDensityTerm { subset: s.bits(), value: v });
    }
    Ok(v)
}

/// V_θ(z).
pub fn exponent(p: &ParamVector, z: &[f64]) -> Result<f64> {
    Model::new(p)?.exponent(z)
}

/// −∂_S V_θ(z).
pub fn block_derivative(p: &ParamVector, z: &[f64], s: SubsetIndicator) -> Result<f64> {
    Model::new(p)?.block_derivative(z, s)
}

pub fn angular_density(p: &ParamVector, w: &[f64], face: SubsetIndicator) -> Result<f64> {
    Model::new(p)?.angular_density(w, face)
}

pub fn exponent_measure_density(p: &ParamVector, z: &[f64], face: SubsetIndicator) -> Result<f64> {
    Model::new(p)?.exponent_measure_density(z, face)
}

pub fn sample_pj(p: &ParamVector, j: usize, rng: &mut RngStream) -> Result<SpectralFunction> {
    Model::new(p)?.sample_pj(j, rng)
}

/// ∫ g(w) h_I(w) dw over the open face `I` (a point mass when |I| = 1).
pub fn angular_integral<G: Fn(&[f64]) -> f64>(
    model: &Model,
    face: SubsetIndicator,
    g: G,
    rel_tol: f64,
) -> Result<f64> {
    match model {
        Model::Dirichlet(m) => face_quad::angular_integral(m, face.bits(), g, rel_tol),
        Model::ExtremalT(m) => face_quad::angular_integral(m, face.bits(), g, rel_tol),
        _ => Err(Error::UnsupportedModel(format!(
            "{} has no implemented angular density",
            model.model_id()
        ))),
    }
}
