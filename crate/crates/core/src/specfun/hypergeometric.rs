use super::gamma::ln_gamma_unchecked;
use super::{is_nonpositive_integer, Accuracy};
use crate::error::{Error, Result};

/// Above this argument ₁F₁ with positive parameters tries the large-z
/// asymptotic expansion before the (log-scaled) ascending series.
const KUMMER_ASYMPTOTIC_Z: f64 = 30.0;

/// Largest |x|, |y| accepted by [`humbert_phi2`].
pub const PHI2_ENVELOPE: f64 = 50.0;

// Series whose absolute-term sum exceeds the result by more than this factor
// times machine epsilon have lost too many digits to cancellation.
const CANCELLATION_LIMIT: f64 = 1e-10;

// Series are summed until the tail bound is well below the requested
// tolerance; the bound is loose by a small factor near convergence.
fn stop_tol(acc: &Accuracy) -> f64 {
    (acc.rel_tol() * 1e-3).max(f64::EPSILON * 0.25)
}

fn check_finite(op: &'static str, args: &[f64]) -> Result<()> {
    if args.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(op, format!("non-finite argument in {args:?}")))
    }
}

/// Confluent hypergeometric function ₁F₁(a; b; z) with default accuracy.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    kummer_1f1_with(a, b, z, &Accuracy::default())
}

pub fn kummer_1f1_with(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    check_finite("kummer_1f1", &[a, b, z])?;
    if is_nonpositive_integer(b) {
        return Err(Error::domain("kummer_1f1", format!("b = {b} is a non-positive integer")));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return finite_or_range("kummer_1f1", z.exp());
    }
    if z > 0.0 && a > 0.0 && b > 0.0 {
        return finite_or_range("kummer_1f1", ln_kummer_positive(a, b, z, acc)?.exp());
    }
    if z < -1.0 && !is_nonpositive_integer(a) {
        // Kummer transformation: ₁F₁(a; b; z) = e^z ₁F₁(b−a; b; −z).
        let ap = b - a;
        if ap > 0.0 && b > 0.0 {
            return finite_or_range("kummer_1f1", (z + ln_kummer_positive(ap, b, -z, acc)?).exp());
        }
        let v = direct_1f1(ap, b, -z, acc)?;
        return finite_or_range("kummer_1f1", v.signum() * (z + v.abs().ln()).exp());
    }
    direct_1f1(a, b, z, acc)
}

/// ln ₁F₁(a; b; z) for a > 0, b > 0, z ≥ 0, where the function is ≥ 1 and
/// may exceed the f64 range.
pub fn ln_kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    ln_kummer_1f1_with(a, b, z, &Accuracy::default())
}

pub fn ln_kummer_1f1_with(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    check_finite("ln_kummer_1f1", &[a, b, z])?;
    if !(a > 0.0 && b > 0.0 && z >= 0.0) {
        return Err(Error::domain(
            "ln_kummer_1f1",
            format!("requires a > 0, b > 0, z >= 0 (got a={a}, b={b}, z={z})"),
        ));
    }
    ln_kummer_positive(a, b, z, acc)
}

fn finite_or_range(op: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            op,
            detail: "result overflows f64".into(),
        })
    }
}

pub(crate) fn ln_kummer_positive(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    if a == b {
        return Ok(z);
    }
    if z > KUMMER_ASYMPTOTIC_Z {
        if let Some(v) = ln_kummer_asymptotic(a, b, z, acc) {
            return Ok(v);
        }
    }
    ln_kummer_series(a, b, z, acc)
}

// All terms positive; term and sum are renormalised together so that the
// magnitude lives in `ln_scale`.
fn ln_kummer_series(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    let tol = stop_tol(acc);
    let mut ln_scale = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let ratio = |k: f64| (a + k) * z / ((b + k) * (k + 1.0));
    for k in 0..acc.max_terms() {
        let kf = k as f64;
        let r = ratio(kf);
        term *= r;
        sum += term;
        if sum > 1e250 {
            ln_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if r < 1.0 && ratio(kf + 1.0) <= r && term * r / (1.0 - r) <= tol * sum {
            return Ok(ln_scale + sum.ln());
        }
    }
    Err(Error::Accuracy {
        op: "kummer_1f1",
        partial: ln_scale + sum.ln(),
        terms: acc.max_terms(),
    })
}

// ₁F₁(a;b;z) ~ Γ(b)/Γ(a) e^z z^(a−b) Σ (b−a)_k (1−a)_k / (k! z^k).
// Returns None when the expansion cannot deliver the requested tolerance.
fn ln_kummer_asymptotic(a: f64, b: f64, z: f64, acc: &Accuracy) -> Option<f64> {
    let tol = stop_tol(acc);
    // The recessive term Γ(b)/Γ(b−a)·z^(−a) must be negligible.
    if !is_nonpositive_integer(b - a) {
        let ln_second = ln_gamma_unchecked(a) - ln_abs_gamma(b - a) - z + (b - 2.0 * a) * z.ln();
        if ln_second > tol.ln() - 2.0 {
            return None;
        }
    }
    let mut u = 1.0f64;
    let mut s = 1.0f64;
    let mut converged = false;
    for k in 0..acc.max_terms().min(500) {
        let kf = k as f64;
        let next = u * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * z);
        if next == 0.0 {
            converged = true;
            break;
        }
        if next.abs() >= u.abs() {
            return None;
        }
        u = next;
        s += u;
        if u.abs() <= tol * s.abs() {
            converged = true;
            break;
        }
    }
    if !converged || s <= 0.0 {
        return None;
    }
    Some(ln_gamma_unchecked(b) - ln_gamma_unchecked(a) + z + (a - b) * z.ln() + s.ln())
}

fn ln_abs_gamma(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma_unchecked(x)
    } else {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().abs().ln()
            - ln_gamma_unchecked(1.0 - x)
    }
}

fn direct_1f1(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    let tol = stop_tol(acc);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut abs_sum = 1.0f64;
    let ratio = |k: f64| (a + k) * z / ((b + k) * (k + 1.0));
    let mut done = false;
    for k in 0..acc.max_terms() {
        let kf = k as f64;
        let r = ratio(kf);
        term *= r;
        sum += term;
        abs_sum += term.abs();
        if term == 0.0 {
            done = true;
            break;
        }
        let settled = a + kf > 0.0 && b + kf > 0.0;
        let ra = r.abs();
        if settled
            && ra < 1.0
            && ratio(kf + 1.0).abs() <= ra
            && term.abs() * ra / (1.0 - ra) <= tol * sum.abs()
        {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::Accuracy {
            op: "kummer_1f1",
            partial: sum,
            terms: acc.max_terms(),
        });
    }
    check_cancellation("kummer_1f1", sum, abs_sum)?;
    finite_or_range("kummer_1f1", sum)
}

fn check_cancellation(op: &'static str, sum: f64, abs_sum: f64) -> Result<()> {
    if abs_sum * f64::EPSILON > CANCELLATION_LIMIT * sum.abs() {
        Err(Error::Accuracy {
            op,
            partial: sum,
            terms: 0,
        })
    } else {
        Ok(())
    }
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for z < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_with(a, b, c, z, &Accuracy::default())
}

pub fn gauss_2f1_with(a: f64, b: f64, c: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    check_finite("gauss_2f1", &[a, b, c, z])?;
    if z >= 1.0 {
        return Err(Error::domain("gauss_2f1", format!("z = {z} must be < 1")));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::domain("gauss_2f1", format!("c = {c} is a non-positive integer")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z < 0.0 {
        // Pfaff: ₂F₁(a,b;c;z) = (1−z)^(−a) ₂F₁(a, c−b; c; z/(z−1)), argument in (0,1).
        let w = z / (z - 1.0);
        let pref = -a * (-z).ln_1p();
        let s = gauss_series(a, c - b, c, w, acc)?;
        return finite_or_range("gauss_2f1", s * pref.exp());
    }
    gauss_series(a, b, c, z, acc)
}

fn gauss_series(a: f64, b: f64, c: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    let tol = stop_tol(acc);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut abs_sum = 1.0f64;
    let ratio = |k: f64| (a + k) * (b + k) * z / ((c + k) * (k + 1.0));
    let mut done = false;
    for k in 0..acc.max_terms() {
        let kf = k as f64;
        let r = ratio(kf);
        term *= r;
        sum += term;
        abs_sum += term.abs();
        if term == 0.0 {
            done = true;
            break;
        }
        let settled = a + kf > 0.0 && b + kf > 0.0 && c + kf > 0.0;
        // Ratios tend to z monotonically once the Pochhammer factors are positive.
        let q = r.abs().max(z.abs());
        if settled && q < 1.0 && term.abs() * q / (1.0 - q) <= tol * sum.abs() {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::Accuracy {
            op: "gauss_2f1",
            partial: sum,
            terms: acc.max_terms(),
        });
    }
    check_cancellation("gauss_2f1", sum, abs_sum)?;
    finite_or_range("gauss_2f1", sum)
}

/// Humbert's bivariate confluent function
/// Φ₂(b1, b2; c; x, y) = Σⱼₖ (b1)ⱼ (b2)ₖ xʲ yᵏ / ((c)ⱼ₊ₖ j! k!).
///
/// Only evaluated for |x|, |y| ≤ [`PHI2_ENVELOPE`]; outside it an
/// [`Error::OutsideEnvelope`] is returned so the caller can integrate instead.
/// When both arguments are negative the transformation
/// Φ₂(b1,b2;c;x,y) = eˣ Φ₂(c−b1−b2, b2; c; −x, y−x) is applied first, which
/// turns the alternating double series into one with non-negative arguments.
pub fn humbert_phi2(b1: f64, b2: f64, c: f64, x: f64, y: f64) -> Result<f64> {
    humbert_phi2_with(b1, b2, c, x, y, &Accuracy::default())
}

pub fn humbert_phi2_with(b1: f64, b2: f64, c: f64, x: f64, y: f64, acc: &Accuracy) -> Result<f64> {
    let (ln_pref, s) = humbert_phi2_scaled(b1, b2, c, x, y, acc)?;
    finite_or_range("humbert_phi2", s * ln_pref.exp())
}

/// Φ₂ as `(ln_prefactor, series)` with value `exp(ln_prefactor) · series`.
pub(crate) fn humbert_phi2_scaled(
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    acc: &Accuracy,
) -> Result<(f64, f64)> {
    check_finite("humbert_phi2", &[b1, b2, c, x, y])?;
    if is_nonpositive_integer(c) {
        return Err(Error::domain("humbert_phi2", format!("c = {c} is a non-positive integer")));
    }
    if x.abs() > PHI2_ENVELOPE || y.abs() > PHI2_ENVELOPE {
        return Err(Error::OutsideEnvelope {
            op: "humbert_phi2",
            detail: format!("|x| = {}, |y| = {} exceed {PHI2_ENVELOPE}", x.abs(), y.abs()),
        });
    }
    if x < 0.0 && y < 0.0 {
        let s = c - b1 - b2;
        return if x <= y {
            Ok((x, phi2_series(s, b2, c, -x, y - x, acc)?))
        } else {
            Ok((y, phi2_series(b1, s, c, x - y, -y, acc)?))
        };
    }
    Ok((0.0, phi2_series(b1, b2, c, x, y, acc)?))
}

fn phi2_series(b1: f64, b2: f64, c: f64, x: f64, y: f64, acc: &Accuracy) -> Result<f64> {
    let tol = stop_tol(acc);
    let budget = acc.max_terms();
    let mut used = 0usize;
    let mut total = 0.0f64;
    let mut abs_total = 0.0f64;
    let mut lead = 1.0f64; // term (j, 0)
    let mut prev_row_abs = f64::INFINITY;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        let mut t = lead;
        let mut row = t;
        let mut row_abs = t.abs();
        if t != 0.0 && y != 0.0 {
            let ratio = |k: f64| (b2 + k) * y / ((c + jf + k) * (k + 1.0));
            let mut k = 0usize;
            loop {
                let kf = k as f64;
                let r = ratio(kf);
                t *= r;
                row += t;
                row_abs += t.abs();
                used += 1;
                if t == 0.0 {
                    break;
                }
                let settled = b2 + kf > 0.0 && c + jf + kf > 0.0;
                let ra = r.abs();
                if settled
                    && ra < 1.0
                    && ratio(kf + 1.0).abs() <= ra
                    && t.abs() * ra / (1.0 - ra) <= 0.1 * tol * row_abs
                {
                    break;
                }
                if used > budget {
                    return Err(Error::Accuracy {
                        op: "humbert_phi2",
                        partial: total + row,
                        terms: used,
                    });
                }
                k += 1;
            }
        }
        total += row;
        abs_total += row_abs;
        used += 1;

        let rj = (b1 + jf) * x / ((c + jf) * (jf + 1.0));
        lead *= rj;
        if lead == 0.0 {
            break;
        }
        let settled = b1 + jf > 0.0 && c + jf > 0.0;
        if settled && rj.abs() < 1.0 && row_abs <= prev_row_abs && row_abs <= 0.1 * tol * total.abs() {
            break;
        }
        if used > budget {
            return Err(Error::Accuracy {
                op: "humbert_phi2",
                partial: total,
                terms: used,
            });
        }
        prev_row_abs = row_abs;
        j += 1;
    }
    check_cancellation("humbert_phi2", total, abs_total)?;
    finite_or_range("humbert_phi2", total)
}
