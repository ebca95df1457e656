//! Maximum likelihood fitting, information matrices and Wald intervals.
//!
//! Everything is done in the unconstrained coordinates of a
//! [`Parameterization`]; intervals are mapped back to the natural scale.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{score_at, ScoreMethod};
use crate::models::Model;
use crate::numerics::diff::{finite_diff_gradient, finite_diff_hessian, finite_diff_jacobian};
use crate::numerics::linalg::min_eigenvalue;
use crate::numerics::normal::norm_quantile;
use crate::numerics::rng::domain_seed;
use crate::numerics::RngStream;
use crate::params::{Dataset, ModelId, ParamVector, Parameterization};
use crate::simulate::{simulate_streams, SimulationMethod};

/// Information matrices with a smaller eigenvalue are treated as singular.
pub const SINGULAR_EIGENVALUE: f64 = 1e-10;

const MULTISTART_DOMAIN: u64 = 0x6d6c_6573_7461_7274;
const FISHER_DOMAIN: u64 = 0x6669_7368_6572;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Number of starts; start 0 is the supplied initial value.
    pub n_starts: usize,
    /// Standard deviation of the random offsets for starts 1.., in
    /// unconstrained coordinates.
    pub start_spread: f64,
    pub seed: u64,
    pub max_nm_iter: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub grad_tol: f64,
    pub hessian_step: f64,
    pub level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_starts: 3,
            start_spread: 0.3,
            seed: 0,
            max_nm_iter: 400,
            max_iter: 200,
            rel_tol: 1e-9,
            grad_tol: 1e-5,
            hessian_step: 1e-4,
            level: 0.95,
        }
    }
}

/// Outcome of one optimizer start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: usize,
    pub init: Vec<f64>,
    pub unconstrained: Option<Vec<f64>>,
    pub loglik: Option<f64>,
    pub converged: bool,
    pub n_iter: usize,
    pub gradient_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval {
    pub name: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// `transformed` when the unconstrained interval was mapped endpoint by
    /// endpoint, `delta` when a delta-method standard error was used.
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelId,
    pub parameterization: Parameterization,
    pub theta_hat: ParamVector,
    pub names: Vec<String>,
    pub estimate: Vec<f64>,
    pub unconstrained: Vec<f64>,
    pub loglik: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub n_iter: usize,
    pub gradient_norm: f64,
    pub observed_info: Vec<Vec<f64>>,
    pub opg_info: Vec<Vec<f64>>,
    pub level: f64,
    pub wald_intervals: Option<Vec<WaldInterval>>,
    pub starts: Vec<StartOutcome>,
    pub starts_disagree: bool,
}

impl FitResult {
    pub fn observed_info_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.observed_info)
    }

    pub fn opg_info_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.opg_info)
    }
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// The conventional starting point for each family.
pub fn default_init(model: ModelId, dim: usize) -> Result<ParamVector> {
    match model {
        ModelId::Logistic => ParamVector::logistic(dim, 0.7),
        ModelId::Dirichlet => ParamVector::dirichlet(vec![1.0; dim]),
        ModelId::HueslerReiss => {
            ParamVector::huesler_reiss(DMatrix::from_fn(dim, dim, |i, j| if i == j { 0.0 } else { 0.5 }))
        }
        ModelId::ExtremalT => Err(unsupported_fit()),
    }
}

fn unsupported_fit() -> Error {
    Error::UnsupportedModel("maximum likelihood fitting is available for logistic, dirichlet and huesler_reiss".into())
}

/// Mean log-likelihood at unconstrained `v`.
pub fn mean_loglik(param: &Parameterization, v: &[f64], data: &Dataset) -> Result<f64> {
    let p = param.decode(v)?;
    Ok(Model::new(&p)?.log_likelihood(data)? / data.len() as f64)
}

/// Fits starting from a model parameter vector.
pub fn fit_params(init: &ParamVector, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    let param = Parameterization::for_params(init);
    let v0 = param.encode(init)?;
    fit(&param, data, &v0, opts)
}

/// Maximizes the log-likelihood over the unconstrained coordinates of
/// `param`, starting from `init` and `opts.n_starts − 1` perturbed copies.
pub fn fit(param: &Parameterization, data: &Dataset, init: &[f64], opts: &FitOptions) -> Result<FitResult> {
    if param.model_id() == ModelId::ExtremalT {
        return Err(unsupported_fit());
    }
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.dim() != param.data_dim() {
        return Err(Error::ShapeMismatch(format!(
            "data has {} columns, model expects {}",
            data.dim(),
            param.data_dim()
        )));
    }
    if init.len() != param.dim() {
        return Err(Error::ShapeMismatch(format!(
            "initial vector has {} coordinates, expected {}",
            init.len(),
            param.dim()
        )));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidConfig(format!("level {} outside (0, 1)", opts.level)));
    }
    let n_starts = opts.n_starts.max(1);
    let objective = |v: &[f64]| -> f64 {
        match mean_loglik(param, v, data) {
            Ok(x) if x.is_finite() => -x,
            _ => f64::INFINITY,
        }
    };

    let mut starts = Vec::with_capacity(n_starts);
    let mut first_error = None;
    for s in 0..n_starts {
        let x0: Vec<f64> = if s == 0 {
            init.to_vec()
        } else {
            let mut rng = RngStream::for_domain(opts.seed, MULTISTART_DOMAIN, s as u64);
            init.iter().map(|x| x + opts.start_spread * rng.standard_normal()).collect()
        };
        match optimize(&objective, &x0, opts) {
            Ok(run) => starts.push(StartOutcome {
                start: s,
                init: x0,
                loglik: Some(-run.value * data.len() as f64),
                unconstrained: Some(run.x),
                converged: run.converged,
                n_iter: run.n_iter,
                gradient_norm: Some(run.gradient_norm),
                error: None,
            }),
            Err(e) => {
                starts.push(StartOutcome {
                    start: s,
                    init: x0,
                    unconstrained: None,
                    loglik: None,
                    converged: false,
                    n_iter: 0,
                    gradient_norm: None,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let pick = |want_converged: bool| {
        starts
            .iter()
            .filter(|s| s.loglik.is_some() && (!want_converged || s.converged))
            .max_by(|a, b| a.loglik.unwrap().total_cmp(&b.loglik.unwrap()))
    };
    let best = match pick(true).or_else(|| pick(false)) {
        Some(b) => b.clone(),
        None => return Err(first_error.unwrap_or(Error::NoImprovement)),
    };
    let best_ll = best.loglik.unwrap();
    let starts_disagree = starts
        .iter()
        .filter(|s| s.converged)
        .any(|s| (s.loglik.unwrap() - best_ll).abs() > 1e-6 * best_ll.abs().max(1.0));

    let v_hat = best.unconstrained.clone().unwrap();
    let theta_hat = param.decode(&v_hat)?;
    let observed = observed_information(param, &v_hat, data, opts.hessian_step)?;
    let opg = opg_on_data(param, &v_hat, data)?;
    let mut fit = FitResult {
        model: param.model_id(),
        parameterization: param.clone(),
        theta_hat,
        names: param.natural_names(),
        estimate: param.natural_from_unconstrained(&v_hat)?,
        unconstrained: v_hat,
        loglik: best_ll,
        n_obs: data.len(),
        converged: best.converged,
        n_iter: best.n_iter,
        gradient_norm: best.gradient_norm.unwrap(),
        observed_info: to_rows(&observed),
        opg_info: to_rows(&opg),
        level: opts.level,
        wald_intervals: None,
        starts,
        starts_disagree,
    };
    fit.wald_intervals = wald_interval(&fit, opts.level).ok();
    Ok(fit)
}

struct Run {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    n_iter: usize,
    gradient_norm: f64,
}

fn optimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &FitOptions) -> Result<Run> {
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(Error::NoImprovement);
    }
    let (x_nm, f_nm, nm_iter) = nelder_mead(f, x0, f0, opts.max_nm_iter);
    let mut run = bfgs(f, &x_nm, f_nm, opts)?;
    run.n_iter += nm_iter;
    Ok(run)
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], f0: f64, max_iter: usize) -> (Vec<f64>, f64, usize) {
    let d = x0.len();
    if d == 0 {
        return (x0.to_vec(), f0, 0);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += 0.25;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect()
    };
    let mut iter = 0;
    while iter < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let spread = (worst - best).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= 1e-10 * best.abs().max(1.0) && diameter < 1e-6 {
            break;
        }
        iter += 1;
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let xr = point(&centroid, &simplex[d].0, -1.0);
        let fr = f(&xr);
        if fr < best {
            let xe = point(&centroid, &simplex[d].0, -2.0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = point(&centroid, &xr, 0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = point(&centroid, &simplex[d].0, 0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < worst.min(fr) {
            simplex[d] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, fx) in simplex[1..].iter_mut() {
            *x = point(&x_best, x, 0.5);
            *fx = f(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, iter)
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Result<DVector<f64>> {
    let g = finite_diff_gradient(|v| Ok(f(v)), x, None)?;
    Ok(DVector::from_vec(g))
}

fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], f0: f64, opts: &FitOptions) -> Result<Run> {
    let d = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f0;
    let mut g = gradient(f, x.as_slice())?;
    let mut h = DMatrix::<f64>::identity(d, d);
    let mut rel_change = f64::INFINITY;
    let mut first_update = true;
    for iter in 0..opts.max_iter {
        let gnorm = g.norm();
        if gnorm < opts.grad_tol && rel_change < opts.rel_tol {
            return Ok(Run { x: x.as_slice().to_vec(), value: fx, converged: true, n_iter: iter, gradient_norm: gnorm });
        }
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h = DMatrix::identity(d, d);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = &x + t * &dir;
            let fnew = f(xn.as_slice());
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // no descent along the quasi-Newton direction: numerically stationary
            return Ok(Run {
                x: x.as_slice().to_vec(),
                value: fx,
                converged: gnorm < opts.grad_tol,
                n_iter: iter,
                gradient_norm: gnorm,
            });
        };
        let gn = gradient(f, xn.as_slice())?;
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first_update {
                h *= sy / y.dot(&y);
                first_update = false;
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(d, d);
            let a = &eye - rho * &s * y.transpose();
            let b = &eye - rho * &y * s.transpose();
            h = &a * &h * &b + rho * &s * s.transpose();
        }
        rel_change = (fx - fnew).abs() / fnew.abs().max(1.0);
        x = xn;
        fx = fnew;
        g = gn;
    }
    let gnorm = g.norm();
    Ok(Run {
        x: x.as_slice().to_vec(),
        value: fx,
        converged: gnorm < opts.grad_tol && rel_change < opts.rel_tol,
        n_iter: opts.max_iter,
        gradient_norm: gnorm,
    })
}

fn default_score_method(param: &Parameterization) -> ScoreMethod {
    match param {
        Parameterization::Natural { model: ModelId::Logistic, .. } => ScoreMethod::Analytic,
        _ => ScoreMethod::FiniteDiff,
    }
}

/// −Hessian of the mean log-likelihood by central differences.
fn observed_information(param: &Parameterization, v: &[f64], data: &Dataset, step: f64) -> Result<DMatrix<f64>> {
    let h = finite_diff_hessian(|x| mean_loglik(param, x, data), v, step)?;
    let m = -h;
    Ok((&m + m.transpose()) * 0.5)
}

fn outer_products(
    param: &Parameterization,
    v: &[f64],
    points: &[&[f64]],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let method = default_score_method(param);
    let scores: Vec<Vec<f64>> = points
        .par_iter()
        .map(|z| score_at(param, v, z, method))
        .collect::<Result<_>>()?;
    let d = v.len();
    let n = scores.len() as f64;
    let mut mean = DMatrix::<f64>::zeros(d, d);
    let mut sq = DMatrix::<f64>::zeros(d, d);
    for s in &scores {
        for i in 0..d {
            for j in 0..d {
                let p = s[i] * s[j];
                mean[(i, j)] += p;
                sq[(i, j)] += p * p;
            }
        }
    }
    mean /= n;
    let se = DMatrix::from_fn(d, d, |i, j| {
        let var = (sq[(i, j)] / n - mean[(i, j)].powi(2)).max(0.0) * n / (n - 1.0).max(1.0);
        (var / n).sqrt()
    });
    Ok((mean, se))
}

fn opg_on_data(param: &Parameterization, v: &[f64], data: &Dataset) -> Result<DMatrix<f64>> {
    let rows: Vec<&[f64]> = data.rows().collect();
    Ok(outer_products(param, v, &rows)?.0)
}

/// How to estimate the Fisher information.
#[derive(Debug, Clone, Copy)]
pub enum FisherMethod<'a> {
    /// Average score outer product over `draws` exact simulations.
    OpgMonteCarlo { draws: usize, seed: u64 },
    /// −Hessian of the mean log-likelihood of `data`.
    Observed { data: &'a Dataset, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherInfo {
    pub method: String,
    pub matrix: Vec<Vec<f64>>,
    /// Monte Carlo standard error of each entry (opg only).
    pub std_errors: Option<Vec<Vec<f64>>>,
    pub min_eigenvalue: f64,
    pub condition_number: f64,
    pub n: usize,
}

impl FisherInfo {
    pub fn matrix(&self) -> DMatrix<f64> {
        from_rows(&self.matrix)
    }

    pub fn std_error_matrix(&self) -> Option<DMatrix<f64>> {
        self.std_errors.as_deref().map(from_rows)
    }
}

/// Fisher information per observation in the unconstrained coordinates `v`
/// of `param`.
pub fn fisher_information(param: &Parameterization, v: &[f64], method: FisherMethod<'_>) -> Result<FisherInfo> {
    let (name, m, se, n) = match method {
        FisherMethod::OpgMonteCarlo { draws, seed } => {
            if draws < 2 {
                return Err(Error::InvalidConfig("opg needs at least 2 draws".into()));
            }
            let model = Model::new(&param.decode(v)?)?;
            let sims = simulate_streams(&model, draws, domain_seed(seed, FISHER_DOMAIN), 0, SimulationMethod::Auto)?;
            let rows: Vec<&[f64]> = sims.rows().collect();
            let (m, se) = outer_products(param, v, &rows)?;
            ("opg_monte_carlo", m, Some(se), draws)
        }
        FisherMethod::Observed { data, step } => {
            if data.is_empty() {
                return Err(Error::EmptyData);
            }
            ("observed", observed_information(param, v, data, step)?, None, data.len())
        }
    };
    let min_eig = min_eigenvalue(&m);
    if !(min_eig >= SINGULAR_EIGENVALUE) {
        return Err(Error::Singular { min_eigenvalue: min_eig });
    }
    let max_eig = m.clone().symmetric_eigen().eigenvalues.max();
    Ok(FisherInfo {
        method: name.into(),
        matrix: to_rows(&m),
        std_errors: se.as_ref().map(to_rows),
        min_eigenvalue: min_eig,
        condition_number: max_eig / min_eig,
        n,
    })
}

fn inverse_info(info: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (info + info.transpose()) * 0.5;
    let min_eig = min_eigenvalue(&sym);
    if !(min_eig >= SINGULAR_EIGENVALUE) {
        return Err(Error::Singular { min_eigenvalue: min_eig });
    }
    sym.try_inverse().ok_or(Error::Singular { min_eigenvalue: min_eig })
}

/// `v_u ± z·√([I⁻¹]_uu / n)` for each unconstrained coordinate.
pub fn wald_unconstrained(v: &[f64], info: &DMatrix<f64>, n: usize, level: f64) -> Result<Vec<(f64, f64)>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level {level} outside (0, 1)")));
    }
    if info.nrows() != v.len() || info.ncols() != v.len() {
        return Err(Error::ShapeMismatch("information matrix and estimate disagree".into()));
    }
    let inv = inverse_info(info)?;
    let q = norm_quantile((1.0 + level) / 2.0);
    Ok(v.iter()
        .enumerate()
        .map(|(u, x)| {
            let se = (inv[(u, u)] / n as f64).sqrt();
            (x - q * se, x + q * se)
        })
        .collect())
}

/// Wald intervals on the natural scale from the observed information of
/// `fit`.
pub fn wald_interval(fit: &FitResult, level: f64) -> Result<Vec<WaldInterval>> {
    let param = &fit.parameterization;
    let info = fit.observed_info_matrix();
    let v = &fit.unconstrained;
    let names = param.natural_names();
    let natural = param.natural_from_unconstrained(v)?;
    if param.is_componentwise() {
        let bounds = wald_unconstrained(v, &info, fit.n_obs, level)?;
        let mut out = Vec::with_capacity(v.len());
        for (u, (lo, hi)) in bounds.into_iter().enumerate() {
            let at = |x: f64| -> Result<f64> {
                let mut w = v.clone();
                w[u] = x;
                Ok(param.natural_from_unconstrained(&w)?[u])
            };
            let (a, b) = (at(lo)?, at(hi)?);
            out.push(WaldInterval {
                name: names[u].clone(),
                estimate: natural[u],
                lower: a.min(b),
                upper: a.max(b),
                method: "transformed".into(),
            });
        }
        return Ok(out);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level {level} outside (0, 1)")));
    }
    let inv = inverse_info(&info)?;
    let jac = finite_diff_jacobian(|w| param.natural_from_unconstrained(w), v, None)?;
    let cov = &jac * inv * jac.transpose() / fit.n_obs as f64;
    let q = norm_quantile((1.0 + level) / 2.0);
    Ok(natural
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let se = cov[(i, i)].max(0.0).sqrt();
            WaldInterval {
                name: names[i].clone(),
                estimate: *x,
                lower: x - q * se,
                upper: x + q * se,
                method: "delta".into(),
            }
        })
        .collect())
}
