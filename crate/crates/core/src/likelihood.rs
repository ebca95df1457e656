//! The max-stable density as a partition sum, log-likelihoods and scores.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::diff::finite_diff_gradient;
use crate::params::{Dataset, ModelId, ParamVector, Parameterization, LOGISTIC_EDGE};
use crate::partitions::{log_sum_partition_products, partition_dp, sum_partition_products};

/// Block values below this switch the partition sum to log space.
pub const LOG_SPACE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBreakdown {
    pub exponent_value: f64,
    /// D_S(z) indexed by subset bits; entry 0 unused.
    pub block_values: Vec<f64>,
    /// Σ_τ Π_j D_{τ_j}(z); may underflow to 0 when `log_space` is set.
    pub partition_sum: f64,
    pub log_partition_sum: f64,
    pub log_density: f64,
    pub log_space: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    Analytic,
    FiniteDiff,
}

impl Model {
    pub fn log_density(&self, z: &[f64]) -> Result<DensityBreakdown> {
        let k = self.dim();
        let exponent_value = self.exponent(z)?;
        let logs = self.log_block_derivatives(z)?;
        let block_values: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let log_space = logs[1..].iter().any(|&l| l < LOG_SPACE_THRESHOLD.ln());
        let (partition_sum, log_partition_sum) = if log_space {
            let mut lv = logs.clone();
            lv[0] = 0.0;
            let la = log_sum_partition_products(&lv, k)?;
            (la.exp(), la)
        } else {
            let a = sum_partition_products(&block_values, k)?;
            (a, a.ln())
        };
        if !(log_partition_sum > f64::NEG_INFINITY) || log_partition_sum.is_nan() {
            return Err(Error::NonPositivePartitionSum);
        }
        Ok(DensityBreakdown {
            exponent_value,
            block_values,
            partition_sum,
            log_partition_sum,
            log_density: -exponent_value + log_partition_sum,
            log_space,
        })
    }

    /// Per-row log densities in row order.
    pub fn log_densities(&self, data: &Dataset) -> Result<Vec<f64>> {
        check_data_dim(self.dim(), data)?;
        let rows: Vec<&[f64]> = data.rows().collect();
        let vals: Vec<Result<f64>> = rows.par_iter().map(|z| self.log_density(z).map(|d| d.log_density)).collect();
        let mut out = Vec::with_capacity(vals.len());
        for (row, v) in vals.into_iter().enumerate() {
            let v = v?;
            if v == f64::NEG_INFINITY {
                return Err(Error::LikelihoodUnderflow { row });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        let mut vals = self.log_densities(data)?;
        // summing in sorted order makes the total independent of row order
        vals.sort_by(f64::total_cmp);
        Ok(neumaier_sum(&vals))
    }
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_data_dim(k: usize, data: &Dataset) -> Result<()> {
    if data.dim() != k {
        return Err(Error::ShapeMismatch(format!("data have {} columns, model dimension is {k}", data.dim())));
    }
    Ok(())
}

pub fn log_density(p: &ParamVector, z: &[f64]) -> Result<DensityBreakdown> {
    Model::new(p)?.log_density(z)
}

pub fn log_likelihood(p: &ParamVector, data: &Dataset) -> Result<f64> {
    Model::new(p)?.log_likelihood(data)
}

/// Gradient of log f in the unconstrained coordinates of the natural
/// parameterization.
pub fn score(p: &ParamVector, z: &[f64], method: ScoreMethod) -> Result<Vec<f64>> {
    let param = Parameterization::for_params(p);
    let v = param.encode(p)?;
    score_at(&param, &v, z, method)
}

/// Gradient of log f with respect to the unconstrained vector `v` of `param`.
pub fn score_at(param: &Parameterization, v: &[f64], z: &[f64], method: ScoreMethod) -> Result<Vec<f64>> {
    match method {
        ScoreMethod::FiniteDiff => finite_diff_gradient(
            |x| Ok(Model::new(&param.decode(x)?)?.log_density(z)?.log_density),
            v,
            None,
        ),
        ScoreMethod::Analytic => match (param, param.model_id()) {
            (Parameterization::Natural { .. }, ModelId::Logistic) => {
                let p = param.decode(v)?;
                let Model::Logistic(m) = Model::new(&p)? else { unreachable!() };
                if z.len() != m.dim() {
                    return Err(Error::ShapeMismatch("point and model dimensions differ".into()));
                }
                let th = m.theta();
                let d_theta = logistic_theta_score(&m, z)?;
                let lo = LOGISTIC_EDGE;
                let jac = (th - lo) * ((1.0 - th) - lo) / (1.0 - 2.0 * lo);
                Ok(vec![d_theta * jac])
            }
            _ => Err(Error::UnsupportedMethod(format!(
                "analytic score is only available for the logistic model, not {}",
                param.model_id()
            ))),
        },
    }
}

/// ∂θ log f for the logistic model: −∂θV + ∂θA / A, with the ratio carried
/// through the partition recurrence as (log value, relative derivative).
fn logistic_theta_score(m: &crate::models::Logistic, z: &[f64]) -> Result<f64> {
    let k = m.dim();
    let (dv, dlog_d) = m.theta_derivatives(z);
    let pre = m.prepare(z);
    let vals: Vec<(f64, f64)> = (0..1usize << k)
        .map(|bits| {
            if bits == 0 {
                (0.0, 0.0)
            } else {
                let s = crate::partitions::SubsetIndicator::from_bits_unchecked(bits as u32);
                (m.log_block_prepared(&pre, z, s), dlog_d[bits])
            }
        })
        .collect();
    let (_, ratio) = partition_dp(
        &vals,
        k,
        (f64::NEG_INFINITY, 0.0),
        (0.0, 0.0),
        |a, b| {
            let l = if a.0 >= b.0 { a.0 + (b.0 - a.0).exp().ln_1p() } else { b.0 + (a.0 - b.0).exp().ln_1p() };
            if l == f64::NEG_INFINITY {
                return (l, 0.0);
            }
            (l, (a.0 - l).exp() * a.1 + (b.0 - l).exp() * b.1)
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(-dv + ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_frechet() {
        for p in [
            ParamVector::logistic(1, 0.4).unwrap(),
            ParamVector::dirichlet(vec![2.0]).unwrap(),
        ] {
            let d = log_density(&p, &[1.0]).unwrap();
            assert!((d.log_density + 1.0).abs() < 1e-12, "{}", d.log_density);
            let d = log_density(&p, &[2.5]).unwrap();
            assert!((d.log_density - (-2.0 * 2.5f64.ln() - 0.4)).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_score_matches_fd() {
        let p = ParamVector::logistic(2, 0.5).unwrap();
        let a = score(&p, &[1.0, 2.0], ScoreMethod::Analytic).unwrap();
        let f = score(&p, &[1.0, 2.0], ScoreMethod::FiniteDiff).unwrap();
        assert!((a[0] / f[0] - 1.0).abs() < 1e-6, "{a:?} {f:?}");
    }

    #[test]
    fn analytic_unsupported_elsewhere() {
        let p = ParamVector::huesler_reiss_pair(1.0).unwrap();
        assert!(matches!(score(&p, &[1.0, 2.0], ScoreMethod::Analytic), Err(Error::UnsupportedMethod(_))));
    }
}
