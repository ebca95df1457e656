//! Parameter containers, observations, and the constrained/unconstrained
//! parameter maps used by the optimizer.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::spatial::{map_spatial_params, SpatialConfig, SpatialFamily};
use crate::numerics::linalg;

/// Smallest distance a logistic dependence parameter may keep from 0 and 1.
pub const LOGISTIC_EDGE: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Logistic,
    Dirichlet,
    HueslerReiss,
    ExtremalT,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [
        ModelId::Logistic,
        ModelId::Dirichlet,
        ModelId::HueslerReiss,
        ModelId::ExtremalT,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Logistic => "logistic",
            ModelId::Dirichlet => "dirichlet",
            ModelId::HueslerReiss => "huesler_reiss",
            ModelId::ExtremalT => "extremal_t",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ModelId::Logistic),
            "dirichlet" => Ok(ModelId::Dirichlet),
            "huesler_reiss" | "husler_reiss" | "hr" => Ok(ModelId::HueslerReiss),
            "extremal_t" => Ok(ModelId::ExtremalT),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Unvalidated parameter payload, as read from a JSON parameter file.
///
/// Matrices are row-major arrays of arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RawParams {
    Logistic { dim: usize, theta: f64 },
    Dirichlet { alpha: Vec<f64> },
    HueslerReiss { lambda2: Vec<Vec<f64>> },
    ExtremalT { sigma: Vec<Vec<f64>>, nu: f64 },
}

impl RawParams {
    pub fn model_id(&self) -> ModelId {
        match self {
            RawParams::Logistic { .. } => ModelId::Logistic,
            RawParams::Dirichlet { .. } => ModelId::Dirichlet,
            RawParams::HueslerReiss { .. } => ModelId::HueslerReiss,
            RawParams::ExtremalT { .. } => ModelId::ExtremalT,
        }
    }
}

/// Validated model parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Logistic { dim: usize, theta: f64 },
    Dirichlet { alpha: Vec<f64> },
    /// Matrix of squared Hüsler–Reiss dependence parameters, zero diagonal.
    HueslerReiss { lambda2: DMatrix<f64> },
    /// Correlation matrix and degrees of freedom.
    ExtremalT { sigma: DMatrix<f64>, nu: f64 },
}

/// A model-tagged parameter set whose domain invariants have been checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ParamVector {
    payload: Payload,
}

impl ParamVector {
    pub fn new(payload: Payload) -> Result<Self> {
        validate_payload(&payload)?;
        Ok(Self { payload })
    }

    pub fn logistic(dim: usize, theta: f64) -> Result<Self> {
        Self::new(Payload::Logistic { dim, theta })
    }

    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        Self::new(Payload::Dirichlet { alpha })
    }

    pub fn huesler_reiss(lambda2: DMatrix<f64>) -> Result<Self> {
        Self::new(Payload::HueslerReiss { lambda2 })
    }

    /// Bivariate Hüsler–Reiss parameters from the single squared parameter.
    pub fn huesler_reiss_pair(lambda2: f64) -> Result<Self> {
        Self::huesler_reiss(DMatrix::from_row_slice(2, 2, &[0.0, lambda2, lambda2, 0.0]))
    }

    pub fn extremal_t(sigma: DMatrix<f64>, nu: f64) -> Result<Self> {
        Self::new(Payload::ExtremalT { sigma, nu })
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn model_id(&self) -> ModelId {
        match &self.payload {
            Payload::Logistic { .. } => ModelId::Logistic,
            Payload::Dirichlet { .. } => ModelId::Dirichlet,
            Payload::HueslerReiss { .. } => ModelId::HueslerReiss,
            Payload::ExtremalT { .. } => ModelId::ExtremalT,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.payload {
            Payload::Logistic { dim, .. } => *dim,
            Payload::Dirichlet { alpha } => alpha.len(),
            Payload::HueslerReiss { lambda2 } => lambda2.nrows(),
            Payload::ExtremalT { sigma, .. } => sigma.nrows(),
        }
    }

    /// Natural-scale coordinates: θ; α; upper-triangular λ² entries;
    /// upper-triangular correlations followed by ν.
    pub fn natural_values(&self) -> Vec<f64> {
        match &self.payload {
            Payload::Logistic { theta, .. } => vec![*theta],
            Payload::Dirichlet { alpha } => alpha.clone(),
            Payload::HueslerReiss { lambda2 } => upper_triangle(lambda2),
            Payload::ExtremalT { sigma, nu } => {
                let mut v = upper_triangle(sigma);
                v.push(*nu);
                v
            }
        }
    }

    /// Rebuilds a parameter vector of the same model and dimension from
    /// natural-scale coordinates (the inverse of [`ParamVector::natural_values`]).
    pub fn with_natural_values(&self, values: &[f64]) -> Result<Self> {
        let k = self.dim();
        let expected = natural_dim(self.model_id(), k);
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} natural coordinates, got {}",
                values.len()
            )));
        }
        let payload = match &self.payload {
            Payload::Logistic { dim, .. } => Payload::Logistic { dim: *dim, theta: values[0] },
            Payload::Dirichlet { .. } => Payload::Dirichlet { alpha: values.to_vec() },
            Payload::HueslerReiss { .. } => Payload::HueslerReiss {
                lambda2: from_upper_triangle(k, values, 0.0),
            },
            Payload::ExtremalT { .. } => {
                let m = k * (k - 1) / 2;
                Payload::ExtremalT {
                    sigma: from_upper_triangle(k, &values[..m], 1.0),
                    nu: values[m],
                }
            }
        };
        ParamVector::new(payload)
    }
}

impl TryFrom<RawParams> for ParamVector {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }
}

impl From<ParamVector> for RawParams {
    fn from(p: ParamVector) -> Self {
        match p.payload {
            Payload::Logistic { dim, theta } => RawParams::Logistic { dim, theta },
            Payload::Dirichlet { alpha } => RawParams::Dirichlet { alpha },
            Payload::HueslerReiss { lambda2 } => RawParams::HueslerReiss {
                lambda2: matrix_to_rows(&lambda2),
            },
            Payload::ExtremalT { sigma, nu } => RawParams::ExtremalT {
                sigma: matrix_to_rows(&sigma),
                nu,
            },
        }
    }
}

/// Checks a raw payload against its model's parameter domain.
pub fn validate_params(raw: RawParams) -> Result<ParamVector> {
    let payload = match raw {
        RawParams::Logistic { dim, theta } => Payload::Logistic { dim, theta },
        RawParams::Dirichlet { alpha } => Payload::Dirichlet { alpha },
        RawParams::HueslerReiss { lambda2 } => Payload::HueslerReiss {
            lambda2: rows_to_matrix(&lambda2)?,
        },
        RawParams::ExtremalT { sigma, nu } => Payload::ExtremalT {
            sigma: rows_to_matrix(&sigma)?,
            nu,
        },
    };
    ParamVector::new(payload)
}

fn validate_payload(payload: &Payload) -> Result<()> {
    match payload {
        Payload::Logistic { dim, theta } => {
            if *dim == 0 {
                return Err(Error::ShapeMismatch("logistic dimension must be positive".into()));
            }
            if !theta.is_finite() {
                return Err(Error::NonFinite("logistic theta".into()));
            }
            if *theta < LOGISTIC_EDGE || *theta > 1.0 - LOGISTIC_EDGE {
                return Err(Error::OutOfDomain(format!(
                    "logistic theta = {theta} must lie in (0, 1) at least {LOGISTIC_EDGE} from either end"
                )));
            }
        }
        Payload::Dirichlet { alpha } => {
            if alpha.is_empty() {
                return Err(Error::ShapeMismatch("dirichlet needs at least one alpha".into()));
            }
            for (i, a) in alpha.iter().enumerate() {
                if !a.is_finite() {
                    return Err(Error::NonFinite(format!("alpha[{i}]")));
                }
                if *a <= 0.0 {
                    return Err(Error::OutOfDomain(format!("alpha[{i}] = {a} must be positive")));
                }
            }
        }
        Payload::HueslerReiss { lambda2 } => {
            let k = check_square(lambda2, "lambda2")?;
            check_symmetric(lambda2, "lambda2")?;
            for i in 0..k {
                if lambda2[(i, i)] != 0.0 {
                    return Err(Error::OutOfDomain("lambda2 must have a zero diagonal".into()));
                }
                for j in (i + 1)..k {
                    let v = lambda2[(i, j)];
                    if v <= 0.0 {
                        return Err(Error::OutOfDomain(format!(
                            "lambda2[{i}][{j}] = {v} must be positive"
                        )));
                    }
                }
            }
            if k >= 2 && !linalg::check_cnd(lambda2)? {
                return Err(Error::NotConditionallyNegativeDefinite);
            }
        }
        Payload::ExtremalT { sigma, nu } => {
            let k = check_square(sigma, "sigma")?;
            check_symmetric(sigma, "sigma")?;
            for i in 0..k {
                if (sigma[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
                    return Err(Error::OutOfDomain("sigma must have a unit diagonal".into()));
                }
            }
            if linalg::min_eigenvalue(sigma) <= linalg::EIGEN_TOL {
                return Err(Error::NotPositiveDefinite("sigma".into()));
            }
            if !nu.is_finite() {
                return Err(Error::NonFinite("nu".into()));
            }
            if *nu <= 0.0 {
                return Err(Error::OutOfDomain(format!("nu = {nu} must be positive")));
            }
        }
    }
    Ok(())
}

fn check_square(m: &DMatrix<f64>, name: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "{name} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(name.to_string()));
    }
    Ok(m.nrows())
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let k = m.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::OutOfDomain(format!("{name} is not symmetric")));
            }
        }
    }
    Ok(())
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch("matrix rows must all have length equal to the row count".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn upper_triangle(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn from_upper_triangle(k: usize, values: &[f64], diag: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(k, k, diag);
    let mut idx = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            m[(i, j)] = values[idx];
            m[(j, i)] = values[idx];
            idx += 1;
        }
    }
    m
}

/// Number of natural-scale coordinates for a model of dimension `k`.
pub fn natural_dim(model: ModelId, k: usize) -> usize {
    match model {
        ModelId::Logistic => 1,
        ModelId::Dirichlet => k,
        ModelId::HueslerReiss => k * (k - 1) / 2,
        ModelId::ExtremalT => k * (k - 1) / 2 + 1,
    }
}

/// Number of unconstrained coordinates for a model of dimension `k`.
pub fn unconstrained_dim(model: ModelId, k: usize) -> usize {
    natural_dim(model, k)
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Maps valid parameters to ℝ^D: scaled logit for θ, log for α and ν,
/// log-Cholesky of the Hüsler–Reiss matrix R⁽¹⁾, and normalised-row
/// Cholesky factors for correlation matrices.
pub fn to_unconstrained(p: &ParamVector) -> Vec<f64> {
    match p.payload() {
        Payload::Logistic { theta, .. } => {
            let lo = LOGISTIC_EDGE;
            vec![((theta - lo) / ((1.0 - theta) - lo)).ln()]
        }
        Payload::Dirichlet { alpha } => alpha.iter().map(|a| a.ln()).collect(),
        Payload::HueslerReiss { lambda2 } => {
            let k = lambda2.nrows();
            if k < 2 {
                return Vec::new();
            }
            let r = linalg::hr_r_matrix(lambda2, 0);
            let l = r
                .cholesky()
                .expect("validated Hüsler–Reiss matrix has positive definite R")
                .unpack();
            let mut v = Vec::with_capacity(k * (k - 1) / 2);
            for i in 0..k - 1 {
                for j in 0..i {
                    v.push(l[(i, j)]);
                }
                v.push((l[(i, i)] * l[(i, i)] / 4.0).ln());
            }
            v
        }
        Payload::ExtremalT { sigma, nu } => {
            let k = sigma.nrows();
            let l = sigma
                .clone()
                .cholesky()
                .expect("validated correlation matrix is positive definite")
                .unpack();
            let mut v = Vec::with_capacity(k * (k - 1) / 2 + 1);
            for i in 1..k {
                for j in 0..i {
                    v.push(l[(i, j)] / l[(i, i)]);
                }
            }
            v.push(nu.ln());
            v
        }
    }
}

/// Inverse of [`to_unconstrained`].
pub fn from_unconstrained(model: ModelId, k: usize, v: &[f64]) -> Result<ParamVector> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("unconstrained coordinate {i}")));
    }
    let d = unconstrained_dim(model, k);
    if v.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "{model} with k = {k} has {d} unconstrained coordinates, got {}",
            v.len()
        )));
    }
    let payload = match model {
        ModelId::Logistic => {
            let lo = LOGISTIC_EDGE;
            let hi = 1.0 - LOGISTIC_EDGE;
            Payload::Logistic { dim: k, theta: lo + (hi - lo) * sigmoid(v[0]) }
        }
        ModelId::Dirichlet => Payload::Dirichlet { alpha: v.iter().map(|x| x.exp()).collect() },
        ModelId::HueslerReiss => {
            let m = k.saturating_sub(1);
            let mut l = DMatrix::zeros(m, m);
            let mut idx = 0;
            for i in 0..m {
                for j in 0..i {
                    l[(i, j)] = v[idx];
                    idx += 1;
                }
                l[(i, i)] = 2.0 * (0.5 * v[idx]).exp();
                idx += 1;
            }
            let r = &l * l.transpose();
            let mut lambda2 = DMatrix::zeros(k, k);
            for j in 1..k {
                let a = r[(j - 1, j - 1)] / 4.0;
                lambda2[(0, j)] = a;
                lambda2[(j, 0)] = a;
            }
            for j in 1..k {
                for m2 in (j + 1)..k {
                    let a = lambda2[(0, j)] + lambda2[(0, m2)] - r[(j - 1, m2 - 1)] / 2.0;
                    lambda2[(j, m2)] = a;
                    lambda2[(m2, j)] = a;
                }
            }
            Payload::HueslerReiss { lambda2 }
        }
        ModelId::ExtremalT => {
            let mut l = DMatrix::zeros(k, k);
            l[(0, 0)] = 1.0;
            let mut idx = 0;
            for i in 1..k {
                let mut norm2 = 1.0;
                for j in 0..i {
                    l[(i, j)] = v[idx];
                    norm2 += v[idx] * v[idx];
                    idx += 1;
                }
                l[(i, i)] = 1.0;
                let norm = norm2.sqrt();
                for j in 0..=i {
                    l[(i, j)] /= norm;
                }
            }
            let mut sigma = &l * l.transpose();
            for i in 0..k {
                sigma[(i, i)] = 1.0;
                for j in 0..i {
                    let s = sigma[(i, j)];
                    sigma[(j, i)] = s;
                }
            }
            Payload::ExtremalT { sigma, nu: v[idx].exp() }
        }
    };
    ParamVector::new(payload)
}

/// How an optimizer's unconstrained vector maps onto model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameterization {
    /// Every free model parameter is estimated.
    Natural { model: ModelId, dim: usize },
    /// Hüsler–Reiss parameters induced by a spatial covariance family on
    /// fixed locations; the free parameters are the family's two raw values.
    Spatial { family: SpatialFamily, locations: Vec<Vec<f64>> },
}

impl Parameterization {
    pub fn natural(model: ModelId, dim: usize) -> Self {
        Parameterization::Natural { model, dim }
    }

    pub fn for_params(p: &ParamVector) -> Self {
        Parameterization::Natural { model: p.model_id(), dim: p.dim() }
    }

    pub fn model_id(&self) -> ModelId {
        match self {
            Parameterization::Natural { model, .. } => *model,
            Parameterization::Spatial { family, .. } => family.model_id(),
        }
    }

    pub fn data_dim(&self) -> usize {
        match self {
            Parameterization::Natural { dim, .. } => *dim,
            Parameterization::Spatial { locations, .. } => locations.len(),
        }
    }

    /// Number of unconstrained coordinates.
    pub fn dim(&self) -> usize {
        match self {
            Parameterization::Natural { model, dim } => unconstrained_dim(*model, *dim),
            Parameterization::Spatial { .. } => 2,
        }
    }

    pub fn decode(&self, v: &[f64]) -> Result<ParamVector> {
        match self {
            Parameterization::Natural { model, dim } => from_unconstrained(*model, *dim, v),
            Parameterization::Spatial { .. } => {
                let cfg = self.spatial_config(&self.natural_from_unconstrained(v)?)?;
                map_spatial_params(&cfg)
            }
        }
    }

    /// Natural-scale coordinates of the estimated quantities.
    pub fn natural_from_unconstrained(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Parameterization::Natural { .. } => Ok(self.decode(v)?.natural_values()),
            Parameterization::Spatial { family, .. } => {
                if v.len() != 2 {
                    return Err(Error::ShapeMismatch("spatial families have 2 coordinates".into()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("unconstrained spatial coordinate".into()));
                }
                Ok(vec![v[0].exp(), family.max_smoothness() * sigmoid(v[1])])
            }
        }
    }

    pub fn unconstrained_from_natural(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Parameterization::Natural { model, dim } => {
                let template = from_unconstrained(*model, *dim, &vec![0.0; self.dim()])?;
                Ok(to_unconstrained(&template.with_natural_values(x)?))
            }
            Parameterization::Spatial { family, .. } => {
                if x.len() != 2 {
                    return Err(Error::ShapeMismatch("spatial families have 2 coordinates".into()));
                }
                let (scale, smooth) = (x[0], x[1]);
                let top = family.max_smoothness();
                if !(scale > 0.0) || !(smooth > 0.0 && smooth < top) {
                    return Err(Error::OutOfDomain(format!(
                        "spatial parameters ({scale}, {smooth}) outside (0,inf) x (0,{top})"
                    )));
                }
                let s = smooth / top;
                Ok(vec![scale.ln(), (s / (1.0 - s)).ln()])
            }
        }
    }

    pub fn encode(&self, p: &ParamVector) -> Result<Vec<f64>> {
        match self {
            Parameterization::Natural { model, dim } => {
                if p.model_id() != *model || p.dim() != *dim {
                    return Err(Error::ShapeMismatch(format!(
                        "parameters are {} with k = {}, expected {model} with k = {dim}",
                        p.model_id(),
                        p.dim()
                    )));
                }
                Ok(to_unconstrained(p))
            }
            Parameterization::Spatial { .. } => Err(Error::InvalidConfig(
                "spatial parameterizations are initialised from (scale, smoothness) values".into(),
            )),
        }
    }

    pub fn natural_names(&self) -> Vec<String> {
        match self {
            Parameterization::Natural { model, dim } => {
                let k = *dim;
                let pairs = |prefix: &str| {
                    let mut out = Vec::new();
                    for i in 0..k {
                        for j in (i + 1)..k {
                            out.push(format!("{prefix}_{}_{}", i + 1, j + 1));
                        }
                    }
                    out
                };
                match model {
                    ModelId::Logistic => vec!["theta".into()],
                    ModelId::Dirichlet => (1..=k).map(|i| format!("alpha_{i}")).collect(),
                    ModelId::HueslerReiss => pairs("lambda2"),
                    ModelId::ExtremalT => {
                        let mut out = pairs("rho");
                        out.push("nu".into());
                        out
                    }
                }
            }
            Parameterization::Spatial { family, .. } => match family {
                SpatialFamily::BrownResnickVariogram => vec!["lambda".into(), "alpha".into()],
                SpatialFamily::SchlatherPowexp => vec!["s".into(), "alpha".into()],
            },
        }
    }

    /// True when natural coordinate i depends on unconstrained coordinate i
    /// alone, monotonically.
    pub fn is_componentwise(&self) -> bool {
        match self {
            Parameterization::Natural { model, dim } => match model {
                ModelId::Logistic | ModelId::Dirichlet => true,
                ModelId::HueslerReiss => *dim <= 2,
                ModelId::ExtremalT => false,
            },
            Parameterization::Spatial { .. } => true,
        }
    }

    fn spatial_config(&self, natural: &[f64]) -> Result<SpatialConfig> {
        match self {
            Parameterization::Spatial { family, locations } => Ok(SpatialConfig {
                family: *family,
                locations: locations.clone(),
                scale: natural[0],
                smoothness: natural[1],
            }),
            Parameterization::Natural { .. } => {
                Err(Error::InvalidConfig("not a spatial parameterization".into()))
            }
        }
    }
}

/// One observation on the unit-Fréchet scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Observation(Vec<f64>);

impl Observation {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        check_row(&z, 0)?;
        Ok(Self(z))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Observation {
    type Error = Error;
    fn try_from(z: Vec<f64>) -> Result<Self> {
        Observation::new(z)
    }
}

impl From<Observation> for Vec<f64> {
    fn from(o: Observation) -> Self {
        o.0
    }
}

fn check_row(z: &[f64], row: usize) -> Result<()> {
    if z.is_empty() {
        return Err(Error::ShapeMismatch(format!("row {row} is empty")));
    }
    for (i, x) in z.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("row {row}, column {}", i + 1)));
        }
        if *x <= 0.0 {
            return Err(Error::OutOfDomain(format!(
                "row {row}, column {}: {x} is not strictly positive",
                i + 1
            )));
        }
    }
    Ok(())
}

/// `n ≥ 1` observations of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyData)?;
        let dim = first.as_ref().len();
        let mut values = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} columns, expected {dim}",
                    r.len()
                )));
            }
            check_row(r, i)?;
            values.extend_from_slice(r);
        }
        Ok(Self { dim, values })
    }

    pub fn from_observations(rows: &[Observation]) -> Result<Self> {
        let slices: Vec<&[f64]> = rows.iter().map(|o| o.as_slice()).collect();
        Self::from_rows(&slices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }
}
