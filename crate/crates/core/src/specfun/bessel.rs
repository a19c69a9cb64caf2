use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};

const MAX_TERMS: usize = 100_000;
const TOL: f64 = 1e-15;

/// Exponentially scaled modified Bessel function e^(−x)·I_ν(x), ν ≥ 0, x ≥ 0.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain("bessel_i", format!("order nu = {nu} must be >= 0")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_i", format!("x = {x} must be finite and >= 0")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x > 30.0 && x > nu * nu {
        if let Some(v) = scaled_asymptotic(nu, x) {
            return Ok(v);
        }
    }
    Ok((ln_series(nu, x)? - x).exp())
}

/// Modified Bessel function of the first kind I_ν(x).
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let s = bessel_i_scaled(nu, x)?;
    let v = if s > 0.0 { (s.ln() + x).exp() } else { 0.0 };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            op: "bessel_i",
            detail: format!("I_{nu}({x}) overflows; use bessel_i_scaled"),
        })
    }
}

// ln I_ν(x) from the ascending series Σ (x/2)^(2k+ν) / (k! Γ(k+ν+1)).
fn ln_series(nu: f64, x: f64) -> Result<f64> {
    let ln_t0 = nu * (0.5 * x).ln() - ln_gamma_unchecked(nu + 1.0);
    let q = 0.25 * x * x;
    let mut ln_scale = 0.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let r = q / ((kf + 1.0) * (kf + nu + 1.0));
        term *= r;
        sum += term;
        if sum > 1e250 {
            ln_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if r < 1.0 && term * r / (1.0 - r) <= TOL * sum {
            return Ok(ln_t0 + ln_scale + sum.ln());
        }
    }
    Err(Error::Accuracy {
        op: "bessel_i",
        partial: ln_t0 + ln_scale + sum.ln(),
        terms: MAX_TERMS,
    })
}

// e^(−x) I_ν(x) ~ (2πx)^(−1/2) Σ (−1)^k a_k(ν) / x^k
fn scaled_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut u = 1.0f64;
    let mut s = 1.0f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -u * (mu4 - odd * odd) / (k as f64 * 8.0 * x);
        if next == 0.0 {
            break;
        }
        if next.abs() >= u.abs() {
            return None;
        }
        u = next;
        s += u;
        if u.abs() <= TOL * s.abs() {
            break;
        }
    }
    Some(s / (2.0 * std::f64::consts::PI * x).sqrt())
}
