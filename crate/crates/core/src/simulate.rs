//! Exact simulation of simple max-stable vectors.
//!
//! Two routes: the logistic family has a direct positive-stable mixture,
//! and every family with a spectral law `P_j` can be sampled by the
//! extremal-functions sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::stable::sample_log_positive_stable;
use crate::numerics::RngStream;
use crate::params::{Dataset, Observation, ParamVector};

pub use crate::models::{sample_pj, SpectralFunction};

/// Tripwire on the number of spectral proposals in one sweep.
pub const MAX_PROPOSALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMethod {
    /// Direct mixture for logistic, extremal functions otherwise.
    #[default]
    Auto,
    ExtremalFunctions,
}

/// One logistic draw: `Z_i = T^θ E_i^{−θ}` with `T` positive stable(θ).
pub fn sample_logistic(theta: f64, k: usize, rng: &mut RngStream) -> Result<Observation> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::OutOfDomain(format!("logistic theta = {theta} outside (0, 1)")));
    }
    if k == 0 {
        return Err(Error::OutOfDomain("dimension must be at least 1".into()));
    }
    let log_t = sample_log_positive_stable(theta, rng)?;
    let z = (0..k).map(|_| (theta * log_t - theta * rng.exp1().ln()).exp()).collect();
    Observation::new(z)
}

/// One draw by the extremal-functions sweep over anchors.
pub fn sample_extremal_functions(model: &Model, rng: &mut RngStream) -> Result<Observation> {
    let k = model.dim();
    let zeta = 1.0 / rng.exp1();
    let first = model.sample_pj(0, rng)?;
    let mut z: Vec<f64> = first.y.iter().map(|y| zeta * y).collect();
    let mut proposals = 0usize;
    for j in 1..k {
        let mut gamma = rng.exp1();
        while 1.0 / gamma > z[j] {
            proposals += 1;
            if proposals > MAX_PROPOSALS {
                return Err(Error::IterationGuard(MAX_PROPOSALS));
            }
            let zeta = 1.0 / gamma;
            let y = model.sample_pj(j, rng)?.y;
            if (0..j).all(|i| zeta * y[i] < z[i]) {
                for (zi, yi) in z.iter_mut().zip(&y) {
                    *zi = zi.max(zeta * yi);
                }
            }
            gamma += rng.exp1();
        }
    }
    Observation::new(z)
}

/// One draw from `model` using `rng`.
pub fn sample_one(model: &Model, method: SimulationMethod, rng: &mut RngStream) -> Result<Observation> {
    match (method, model) {
        (SimulationMethod::Auto, Model::Logistic(m)) => sample_logistic(m.theta(), m.dim(), rng),
        _ => sample_extremal_functions(model, rng),
    }
}

/// `n` independent draws; row `i` uses `RngStream::new(seed, first_stream + i)`.
/// The result does not depend on the number of worker threads.
pub fn simulate_streams(
    model: &Model,
    n: usize,
    seed: u64,
    first_stream: u64,
    method: SimulationMethod,
) -> Result<Dataset> {
    let rows: Vec<Observation> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_one(model, method, &mut RngStream::new(seed, first_stream + i)))
        .collect::<Result<_>>()?;
    Dataset::from_observations(&rows)
}

/// `n` draws from `p` with the default method.
pub fn simulate(p: &ParamVector, n: usize, seed: u64) -> Result<Dataset> {
    simulate_streams(&Model::new(p)?, n, seed, 0, SimulationMethod::Auto)
}

/// `n` draws drawn sequentially from a single stream.
pub fn simulate_sequential(model: &Model, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    let rows = (0..n)
        .map(|_| sample_one(model, SimulationMethod::Auto, rng))
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_observations(&rows)
}
