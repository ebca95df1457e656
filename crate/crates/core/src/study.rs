//! Monte Carlo harness for the asymptotic normality of the MLE: simulate
//! `R` datasets of size `n` at θ₀, fit each, and compare `√n(θ̂ − θ₀)` with
//! `N(0, I⁻¹)` in unconstrained coordinates.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::mle::{fisher_information, fit, FisherMethod, FitOptions};
use crate::models::Model;
use crate::numerics::normal::norm_cdf;
use crate::numerics::RngStream;
use crate::params::{ModelId, ParamVector, Parameterization};
use crate::simulate::simulate_sequential;

/// Offset added to every unconstrained coordinate of θ₀ to form the start.
pub const INIT_OFFSET: f64 = 0.15;
/// Largest tolerated share of non-converged replications.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

fn default_starts() -> usize {
    1
}

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: ModelId,
    pub theta0: ParamVector,
    /// Sample size per replication.
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_level")]
    pub ci_level: f64,
    pub fisher_draws: usize,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta0.model_id() != self.model {
            return Err(Error::InvalidConfig(format!(
                "theta0 is {} but model is {}",
                self.theta0.model_id(),
                self.model
            )));
        }
        if self.model == ModelId::ExtremalT {
            return Err(Error::UnsupportedModel("studies need a fittable model".into()));
        }
        if self.n < 10 || self.replications < 10 {
            return Err(Error::InvalidConfig("studies need n >= 10 and at least 10 replications".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!("ci_level {} outside (0, 1)", self.ci_level)));
        }
        if self.fisher_draws < 2 {
            return Err(Error::InvalidConfig("fisher_draws must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub converged: bool,
    /// Every component's interval covers θ₀; absent unless converged.
    pub covered: Option<bool>,
    pub covered_components: Option<Vec<bool>>,
    pub estimate: Option<Vec<f64>>,
    pub unconstrained: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialInterval {
    pub successes: usize,
    pub trials: usize,
    pub proportion: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub converged: usize,
    pub failed: usize,
    /// Mean of `√n(θ̂ᵤ − θ₀ᵤ)`.
    pub mean: Vec<f64>,
    /// Covariance of `√n(θ̂ᵤ − θ₀ᵤ)`.
    pub covariance: Vec<Vec<f64>>,
    pub empirical_sd: Vec<f64>,
    /// `√([I⁻¹]ᵤᵤ)`.
    pub limit_sd: Vec<f64>,
    pub sd_ratio: Vec<f64>,
    pub kolmogorov: Vec<f64>,
    pub coverage: BinomialInterval,
    pub coverage_components: Vec<BinomialInterval>,
    /// Delta-method limit covariance of `√n(θ̂ − θ₀)` on the natural scale.
    pub natural_limit_covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub names: Vec<String>,
    pub theta0_unconstrained: Vec<f64>,
    pub reference_info: Vec<Vec<f64>>,
    pub reference_info_se: Vec<Vec<f64>>,
    pub reference_inverse: Vec<Vec<f64>>,
    pub replications: Vec<ReplicationRecord>,
    pub summary: StudySummary,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn run_replication(cfg: &StudyConfig, param: &Parameterization, model: &Model, v0: &[f64], rep: usize) -> ReplicationRecord {
    let failed = |e: Error| ReplicationRecord {
        rep,
        converged: false,
        covered: None,
        covered_components: None,
        estimate: None,
        unconstrained: None,
        error: Some(e.to_string()),
    };
    let mut rng = RngStream::new(cfg.master_seed, rep as u64);
    let data = match simulate_sequential(model, cfg.n, &mut rng) {
        Ok(d) => d,
        Err(e) => return failed(e),
    };
    let init: Vec<f64> = v0.iter().map(|x| x + INIT_OFFSET).collect();
    let opts = FitOptions { n_starts: cfg.n_starts, seed: cfg.master_seed, level: cfg.ci_level, ..FitOptions::default() };
    let res = match fit(param, &data, &init, &opts) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let truth = cfg.theta0.natural_values();
    let covered_components = match (&res.wald_intervals, res.converged) {
        (Some(iv), true) => Some(iv.iter().zip(&truth).map(|(w, t)| w.lower <= *t && *t <= w.upper).collect::<Vec<_>>()),
        _ => None,
    };
    // a converged fit without intervals has a singular information matrix
    let converged = res.converged && covered_components.is_some();
    ReplicationRecord {
        rep,
        converged,
        covered: covered_components.as_ref().map(|c| c.iter().all(|x| *x)),
        covered_components,
        estimate: Some(res.estimate),
        unconstrained: Some(res.unconstrained),
        error: if converged { None } else { Some("did not converge".into()) },
    }
}

/// Clopper–Pearson interval at the given level.
pub fn exact_binomial_interval(successes: usize, trials: usize, level: f64) -> BinomialInterval {
    let x = successes as f64;
    let n = trials as f64;
    let a = (1.0 - level) / 2.0;
    let lower = if successes == 0 { 0.0 } else { Beta::new(x, n - x + 1.0).unwrap().inverse_cdf(a) };
    let upper = if successes == trials { 1.0 } else { Beta::new(x + 1.0, n - x).unwrap().inverse_cdf(1.0 - a) };
    BinomialInterval {
        successes,
        trials,
        proportion: if trials == 0 { f64::NAN } else { x / n },
        lower,
        upper,
    }
}

/// Kolmogorov distance between the sample and `N(0, sd²)`.
pub fn kolmogorov_distance(sample: &[f64], sd: f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = norm_cdf(x / sd);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Runs the replications and summarizes the converged ones.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let param = Parameterization::for_params(&cfg.theta0);
    let v0 = param.encode(&cfg.theta0)?;
    let d = v0.len();
    let model = Model::new(&cfg.theta0)?;

    let info = fisher_information(
        &param,
        &v0,
        FisherMethod::OpgMonteCarlo { draws: cfg.fisher_draws, seed: cfg.master_seed },
    )?;
    let i_mat = info.matrix();
    let i_inv = i_mat.clone().try_inverse().ok_or(Error::Singular { min_eigenvalue: info.min_eigenvalue })?;

    let replications: Vec<ReplicationRecord> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, &param, &model, &v0, r))
        .collect();
    let failed = replications.iter().filter(|r| !r.converged).count();
    if failed as f64 > MAX_FAILURE_SHARE * cfg.replications as f64 {
        return Err(Error::TooManyFailures { failed, total: cfg.replications });
    }

    let ok: Vec<&ReplicationRecord> = replications.iter().filter(|r| r.converged).collect();
    let m = ok.len() as f64;
    let root_n = (cfg.n as f64).sqrt();
    let scaled: Vec<Vec<f64>> = ok
        .iter()
        .map(|r| r.unconstrained.as_ref().unwrap().iter().zip(&v0).map(|(a, b)| root_n * (a - b)).collect())
        .collect();
    let mean: Vec<f64> = (0..d).map(|u| scaled.iter().map(|s| s[u]).sum::<f64>() / m).collect();
    let cov = DMatrix::from_fn(d, d, |i, j| {
        scaled.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / (m - 1.0)
    });
    let empirical_sd: Vec<f64> = (0..d).map(|u| cov[(u, u)].sqrt()).collect();
    let limit_sd: Vec<f64> = (0..d).map(|u| i_inv[(u, u)].sqrt()).collect();
    let kolmogorov = (0..d)
        .map(|u| kolmogorov_distance(&scaled.iter().map(|s| s[u]).collect::<Vec<_>>(), limit_sd[u]))
        .collect();
    let covered = ok.iter().filter(|r| r.covered == Some(true)).count();
    let n_nat = param.natural_names().len();
    let coverage_components = (0..n_nat)
        .map(|c| {
            let hits = ok.iter().filter(|r| r.covered_components.as_ref().unwrap()[c]).count();
            exact_binomial_interval(hits, ok.len(), 0.95)
        })
        .collect();
    let jac = crate::numerics::diff::finite_diff_jacobian(|w| param.natural_from_unconstrained(w), &v0, None)?;
    let natural_cov = &jac * &i_inv * jac.transpose();

    let summary = StudySummary {
        converged: ok.len(),
        failed,
        sd_ratio: empirical_sd.iter().zip(&limit_sd).map(|(a, b)| a / b).collect(),
        mean,
        covariance: to_rows(&cov),
        empirical_sd,
        limit_sd,
        kolmogorov,
        coverage: exact_binomial_interval(covered, ok.len(), 0.95),
        coverage_components,
        natural_limit_covariance: to_rows(&natural_cov),
    };
    Ok(StudyResult {
        config: cfg.clone(),
        names: param.natural_names(),
        theta0_unconstrained: v0,
        reference_info: info.matrix.clone(),
        reference_info_se: info.std_errors.clone().unwrap_or_default(),
        reference_inverse: to_rows(&i_inv),
        replications,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a study result: the full JSON document, or one CSV row per
/// replication with header `rep,converged,covered,theta_1,…`.
pub fn summarize(result: &StudyResult, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string())),
        ReportFormat::Csv => {
            let d = result.names.len();
            let mut out = String::from("rep,converged,covered");
            for i in 1..=d {
                let _ = write!(out, ",theta_{i}");
            }
            out.push('\n');
            for r in &result.replications {
                let _ = write!(out, "{},{},", r.rep, r.converged);
                if let Some(c) = r.covered {
                    let _ = write!(out, "{c}");
                }
                match &r.estimate {
                    Some(est) if r.converged => {
                        for x in est {
                            let _ = write!(out, ",{}", fmt_f64(*x));
                        }
                    }
                    _ => out.push_str(&",".repeat(d)),
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}
