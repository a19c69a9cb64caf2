//! One-sample Kolmogorov–Smirnov test.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// KS statistic of ascending `sorted` samples whose hypothesised CDF values
/// are `cdf` (same order).
pub fn ks_from_cdf(cdf: &[f64]) -> Result<KsResult> {
    let n = cdf.len();
    if n == 0 {
        return Err(Error::Usage("KS test needs at least one sample".into()));
    }
    let nf = n as f64;
    let d = cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / nf).max((i + 1) as f64 / nf - f))
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d),
    })
}

/// KS test of `samples` against `cdf`, evaluated on the sorted samples.
pub fn ks_test<F>(samples: &[f64], cdf: F) -> Result<KsResult>
where
    F: FnOnce(&[f64]) -> Result<Vec<f64>>,
{
    let mut xs = samples.to_vec();
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("ks_test", "NaN sample"));
    }
    xs.sort_by(f64::total_cmp);
    let f = cdf(&xs)?;
    if f.len() != xs.len() {
        return Err(Error::domain("ks_test", "cdf returned the wrong number of values"));
    }
    ks_from_cdf(&f)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
