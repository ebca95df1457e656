//! Positive stable variates.

use std::f64::consts::PI;

use super::rng::RngStream;
use crate::error::{Error, Result};

/// log S for S positive stable with Laplace transform `exp(-t^alpha)`.
///
/// Kanter's representation, evaluated in log space so that small `alpha`
/// does not overflow.
pub fn sample_log_positive_stable(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfDomain(format!("stable index {alpha} outside (0, 1]")));
    }
    if alpha == 1.0 {
        return Ok(0.0);
    }
    let u = PI * rng.uniform_open();
    let e = rng.exp1();
    let ls = (alpha * u).sin().ln() - (u.sin().ln()) / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    Ok(ls)
}

/// Positive stable variate with Laplace transform `exp(-t^alpha)`;
/// `alpha = 1` gives the constant 1.
pub fn sample_positive_stable(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    sample_log_positive_stable(alpha, rng).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_index() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_positive_stable(1.0, &mut rng).unwrap(), 1.0);
        assert!(sample_positive_stable(0.0, &mut rng).is_err());
        assert!(sample_positive_stable(1.5, &mut rng).is_err());
    }

    #[test]
    fn laplace_transform_at_one() {
        let mut rng = RngStream::new(11, 0);
        let n = 200_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| (-sample_positive_stable(0.7, &mut rng).unwrap()).exp())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - (-1f64).exp()).abs() < 3.0 * se, "{mean} ± {se}");
    }
}
