//! Parametric spatial families on a finite set of locations, mapped to
//! Hüsler–Reiss or extremal-t parameters.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelId, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialFamily {
    /// Brown–Resnick with variogram γ(h) = ‖h‖^α / λ.
    BrownResnickVariogram,
    /// Schlather (extremal-t, ν = 1) with correlation ρ(h) = exp(−‖h‖^α / s).
    SchlatherPowexp,
}

impl SpatialFamily {
    pub fn model_id(self) -> ModelId {
        match self {
            SpatialFamily::BrownResnickVariogram => ModelId::HueslerReiss,
            SpatialFamily::SchlatherPowexp => ModelId::ExtremalT,
        }
    }

    /// Upper end of the smoothness range (open for Brown–Resnick).
    pub fn max_smoothness(self) -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialConfig {
    pub family: SpatialFamily,
    pub locations: Vec<Vec<f64>>,
    /// λ for Brown–Resnick, s for Schlather.
    #[serde(alias = "lambda", alias = "s")]
    pub scale: f64,
    /// α
    #[serde(alias = "alpha")]
    pub smoothness: f64,
}

fn distances(locations: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let k = locations.len();
    if k < 2 {
        return Err(Error::ShapeMismatch("need at least two locations".into()));
    }
    let d = locations[0].len();
    if d == 0 || locations.iter().any(|t| t.len() != d) {
        return Err(Error::ShapeMismatch("locations must share a positive dimension".into()));
    }
    if locations.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("location coordinate".into()));
    }
    let mut dist = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let h: f64 = locations[i]
                .iter()
                .zip(&locations[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if h == 0.0 {
                return Err(Error::OutOfDomain(format!("locations {} and {} coincide", i + 1, j + 1)));
            }
            dist[(i, j)] = h;
            dist[(j, i)] = h;
        }
    }
    let first = dist[(0, 1)];
    let all_equal = (0..k).all(|i| ((i + 1)..k).all(|j| (dist[(i, j)] - first).abs() <= 1e-12 * first));
    if all_equal {
        return Err(Error::NotIdentifiable);
    }
    Ok(dist)
}

/// Model parameters induced by a spatial configuration.
pub fn map_spatial_params(cfg: &SpatialConfig) -> Result<ParamVector> {
    let (scale, alpha) = (cfg.scale, cfg.smoothness);
    if !scale.is_finite() || !alpha.is_finite() {
        return Err(Error::NonFinite("spatial parameter".into()));
    }
    if scale <= 0.0 {
        return Err(Error::OutOfDomain(format!("scale {scale} must be positive")));
    }
    let alpha_ok = match cfg.family {
        SpatialFamily::BrownResnickVariogram => alpha > 0.0 && alpha < 2.0,
        SpatialFamily::SchlatherPowexp => alpha > 0.0 && alpha <= 2.0,
    };
    if !alpha_ok {
        return Err(Error::OutOfDomain(format!("smoothness {alpha} outside the family's range")));
    }
    let dist = distances(&cfg.locations)?;
    let k = dist.nrows();
    match cfg.family {
        SpatialFamily::BrownResnickVariogram => {
            let l2 = DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { dist[(i, j)].powf(alpha) / (4.0 * scale) });
            ParamVector::huesler_reiss(l2)
        }
        SpatialFamily::SchlatherPowexp => {
            let sigma = DMatrix::from_fn(k, k, |i, j| (-dist[(i, j)].powf(alpha) / scale).exp());
            ParamVector::extremal_t(sigma, 1.0)
        }
    }
}
