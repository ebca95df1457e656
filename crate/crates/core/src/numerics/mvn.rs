//! Multivariate normal distribution function.
//!
//! Dimensions 1 to 3 are handled deterministically (erfc, Drezner–Wesolowsky
//! style bivariate series, and a one-dimensional integral of the bivariate
//! function). Higher dimensions use Genz's separation of variables with a
//! randomised Richtmyer lattice.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::normal::{norm_cdf, norm_quantile};
use super::quadrature::{integrate_1d, Tolerance};
use super::rng::RngStream;
use crate::error::{Error, Result};

pub const MAX_MVN_DIM: usize = 10;
/// Correlations closer than this to ±1 are clamped.
pub const CORR_CLAMP: f64 = 1.0 - 1e-10;

const RANDOMIZATIONS: usize = 12;
const MAX_LATTICE: usize = 1 << 17;
const LATTICE_SEED: u64 = 0x6d76_6e5f_6364_6621;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfResult {
    pub value: f64,
    pub error_estimate: f64,
    /// False when the lattice rule ran out of points before reaching the
    /// requested accuracy.
    pub converged: bool,
    /// True when some correlation was pulled back from ±1.
    pub clamped: bool,
}

impl CdfResult {
    fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, converged: true, clamped: false }
    }
}

/// P(X ≤ upper) for X ~ N(0, covariance).
pub fn mvn_cdf(upper: &[f64], covariance: &DMatrix<f64>, eps: f64) -> Result<CdfResult> {
    let p = upper.len();
    check_inputs(upper, covariance, eps)?;
    if upper.iter().any(|&b| b == f64::NEG_INFINITY) {
        return Ok(CdfResult::exact(0.0));
    }
    // standardise, drop +inf limits
    let keep: Vec<usize> = (0..p).filter(|&i| upper[i] != f64::INFINITY).collect();
    let sd: Vec<f64> = (0..p).map(|i| covariance[(i, i)].sqrt()).collect();
    let b: Vec<f64> = keep.iter().map(|&i| upper[i] / sd[i]).collect();
    let q = keep.len();
    let mut clamped = false;
    let corr = DMatrix::from_fn(q, q, |a, c| {
        if a == c {
            return 1.0;
        }
        let (i, j) = (keep[a], keep[c]);
        let r = 0.5 * (covariance[(i, j)] + covariance[(j, i)]) / (sd[i] * sd[j]);
        if r.abs() > CORR_CLAMP {
            clamped = true;
            r.signum() * CORR_CLAMP
        } else {
            r
        }
    });
    let mut res = match q {
        0 => CdfResult::exact(1.0),
        1 => CdfResult { value: norm_cdf(b[0]), error_estimate: 1e-16, converged: true, clamped: false },
        2 => CdfResult {
            value: bvn_cdf(b[0], b[1], corr[(0, 1)]),
            error_estimate: 1e-15,
            converged: true,
            clamped: false,
        },
        3 => tvn_cdf(&b, &corr, eps)?,
        _ => qmc_cdf(&b, &corr, eps)?,
    };
    res.clamped |= clamped;
    Ok(res)
}

/// Lattice-rule estimate for any dimension; exposed for cross-checks.
pub fn mvn_cdf_qmc(upper: &[f64], covariance: &DMatrix<f64>, eps: f64) -> Result<CdfResult> {
    check_inputs(upper, covariance, eps)?;
    let p = upper.len();
    let sd: Vec<f64> = (0..p).map(|i| covariance[(i, i)].sqrt()).collect();
    let b: Vec<f64> = (0..p).map(|i| upper[i] / sd[i]).collect();
    let corr = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { covariance[(i, j)] / (sd[i] * sd[j]) });
    qmc_cdf(&b, &corr, eps)
}

fn check_inputs(upper: &[f64], covariance: &DMatrix<f64>, eps: f64) -> Result<()> {
    let p = upper.len();
    if p == 0 {
        return Err(Error::ShapeMismatch("mvn_cdf needs at least one coordinate".into()));
    }
    if p > MAX_MVN_DIM {
        return Err(Error::DimensionTooLarge { dim: p, max: MAX_MVN_DIM });
    }
    if covariance.nrows() != p || covariance.ncols() != p {
        return Err(Error::ShapeMismatch(format!(
            "covariance is {}x{}, limits have length {p}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    if !(1e-8..=1e-2).contains(&eps) {
        return Err(Error::OutOfDomain(format!("accuracy target {eps} outside [1e-8, 1e-2]")));
    }
    if upper.iter().any(|x| x.is_nan()) || covariance.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("mvn_cdf input".into()));
    }
    if (0..p).any(|i| covariance[(i, i)] <= 0.0) {
        return Err(Error::NotPositiveDefinite("covariance diagonal".into()));
    }
    if p > 1 && covariance.clone().cholesky().is_none() {
        // allow matrices that are only singular through near-unit correlations
        let sd: Vec<f64> = (0..p).map(|i| covariance[(i, i)].sqrt()).collect();
        let corr = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else {
                let r = covariance[(i, j)] / (sd[i] * sd[j]);
                r.clamp(-CORR_CLAMP, CORR_CLAMP)
            }
        });
        if p > 2 && corr.cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("covariance".into()));
        }
    }
    Ok(())
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on P_n from the Chebyshev initial guesses
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

type Rule = (Vec<f64>, Vec<f64>);

fn gl_rules() -> &'static [Rule; 3] {
    static RULES: OnceLock<[Rule; 3]> = OnceLock::new();
    RULES.get_or_init(|| [gauss_legendre(6), gauss_legendre(12), gauss_legendre(20)])
}

/// P(X > dh, Y > dk) for a standard bivariate normal with correlation r.
fn bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return if dk == f64::NEG_INFINITY { 1.0 } else { norm_cdf(-dk) };
    }
    if dk == f64::NEG_INFINITY {
        return norm_cdf(-dh);
    }
    if r == 0.0 {
        return norm_cdf(-dh) * norm_cdf(-dk);
    }
    let tp = 2.0 * PI;
    let rules = gl_rules();
    let (x, w) = if r.abs() < 0.3 {
        &rules[0]
    } else if r.abs() < 0.75 {
        &rules[1]
    } else {
        &rules[2]
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for (xi, wi) in x.iter().zip(w) {
            let sn = (asr * (xi + 1.0) / 2.0).sin();
            bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        // the full symmetric rule already covers both halves of [-1, 1]
        bvn = bvn * asr / (2.0 * tp) + norm_cdf(-h) * norm_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let as_ = (1.0 - r) * (1.0 + r);
            let mut a = as_.sqrt();
            let bs = (h - k).powi(2);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            bvn = a
                * (-(bs / as_ + hk) / 2.0).exp()
                * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
            if hk > -160.0 {
                let b = bs.sqrt();
                bvn -= (-hk / 2.0).exp() * tp.sqrt() * norm_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (xi, wi) in x.iter().zip(w) {
                let xs = (a * (xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                bvn += a
                    * wi
                    * (-bs / (2.0 * xs) - hk / (1.0 + rs)).exp()
                    * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
            }
            bvn = -bvn / tp;
        }
        if r > 0.0 {
            bvn += norm_cdf(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                if h < 0.0 {
                    bvn += norm_cdf(k) - norm_cdf(h);
                } else {
                    bvn += norm_cdf(-h) - norm_cdf(-k);
                }
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// P(X ≤ h, Y ≤ k) for a standard bivariate normal with correlation r.
pub fn bvn_cdf(h: f64, k: f64, r: f64) -> f64 {
    bvnu(-h, -k, r)
}

/// Trivariate case as a one-dimensional integral of the conditional
/// bivariate probability over the first (most restrictive) coordinate.
fn tvn_cdf(b: &[f64], corr: &DMatrix<f64>, eps: f64) -> Result<CdfResult> {
    let first = (0..3).min_by(|&i, &j| b[i].total_cmp(&b[j])).unwrap();
    let rest: Vec<usize> = (0..3).filter(|&i| i != first).collect();
    let (j, m) = (rest[0], rest[1]);
    let r1j = corr[(first, j)];
    let r1m = corr[(first, m)];
    let sj = (1.0 - r1j * r1j).sqrt();
    let sm = (1.0 - r1m * r1m).sqrt();
    let rc = ((corr[(j, m)] - r1j * r1m) / (sj * sm)).clamp(-CORR_CLAMP, CORR_CLAMP);
    let p1 = norm_cdf(b[first]);
    if p1 == 0.0 {
        return Ok(CdfResult::exact(0.0));
    }
    let integrand = |u: f64| {
        let x = norm_quantile(u * p1);
        bvn_cdf((b[j] - r1j * x) / sj, (b[m] - r1m * x) / sm, rc)
    };
    let tol = Tolerance::new((eps * 1e-3).min(1e-11) / p1, 1e-12);
    let q = integrate_1d(integrand, 0.0, 1.0, tol)?;
    Ok(CdfResult {
        value: (p1 * q.value).clamp(0.0, 1.0),
        error_estimate: p1 * q.error,
        converged: true,
        clamped: false,
    })
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0) {
            out.push(n);
        }
        n += 1;
    }
    out
}

fn qmc_cdf(b: &[f64], corr: &DMatrix<f64>, eps: f64) -> Result<CdfResult> {
    let p = b.len();
    let l = corr
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("correlation".into()))?
        .unpack();
    let gens: Vec<f64> = primes(p).iter().map(|&q| (q as f64).sqrt().fract()).collect();
    let mut rng = RngStream::new(LATTICE_SEED, p as u64);
    let shifts: Vec<Vec<f64>> = (0..RANDOMIZATIONS)
        .map(|_| (0..p - 1).map(|_| rng.uniform_open()).collect())
        .collect();
    let e1 = norm_cdf(b[0]);
    let sov = |w: &[f64]| -> f64 {
        let mut y = [0.0f64; MAX_MVN_DIM];
        let mut e = e1;
        let mut prod = e1;
        for i in 1..p {
            let u = (w[i - 1] * e).clamp(1e-300, 1.0 - 1e-16);
            y[i - 1] = norm_quantile(u);
            let s: f64 = (0..i).map(|jj| l[(i, jj)] * y[jj]).sum();
            e = norm_cdf((b[i] - s) / l[(i, i)]);
            prod *= e;
            if prod == 0.0 {
                break;
            }
        }
        prod
    };
    let mut n = 1024usize;
    let mut w = vec![0.0; p.saturating_sub(1)];
    loop {
        let mut means = [0.0f64; RANDOMIZATIONS];
        for (r, shift) in shifts.iter().enumerate() {
            let mut acc = 0.0;
            for i in 1..=n {
                for d in 0..p - 1 {
                    let x = (i as f64 * gens[d] + shift[d]).fract();
                    w[d] = 1.0 - (2.0 * x - 1.0).abs();
                }
                acc += sov(&w);
            }
            means[r] = acc / n as f64;
        }
        let mean = means.iter().sum::<f64>() / RANDOMIZATIONS as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (RANDOMIZATIONS - 1) as f64;
        let err = 3.0 * (var / RANDOMIZATIONS as f64).sqrt();
        if err <= eps || n >= MAX_LATTICE {
            return Ok(CdfResult {
                value: mean.clamp(0.0, 1.0),
                error_estimate: err,
                converged: err <= eps,
                clamped: false,
            });
        }
        n *= 2;
    }
}
