//! Closed-form average error rate and ergodic capacity.
//!
//! With `Q_a(√x) ≈ Σ δᵢ e^(−σᵢx)` the fading average of `𝒜·Q_a(√(ℬγ))`
//! becomes `𝒜·Σ δᵢ·M(−σᵢℬ)`, where `M` is the combined-SNR MGF.

use std::f64::consts::PI;

use crate::approx::{ApproxTarget, ExpSumApprox};
use crate::error::{Error, Result};
use crate::fading::MrcChannel;
use crate::specfun;

/// Coherent modulation schemes. `M` is the constellation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bfsk,
    Bpsk,
    /// QPSK / 4-QAM.
    Qpsk,
    Pam(u32),
    Psk(u32),
    RectQam(u32),
    NonRectQam(u32),
}

/// A scheme with its error-rate constants: `P ≈ 𝒜·Q_a(√(ℬγ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    scheme: Modulation,
    a: f64,
    b: f64,
}

impl ModulationSpec {
    pub fn new(scheme: Modulation) -> Result<Self> {
        let op = "ModulationSpec";
        let order = |m: u32, pow2: bool| -> Result<f64> {
            if m < 2 {
                return Err(Error::domain(op, format!("M = {m} must be >= 2")));
            }
            if pow2 && !m.is_power_of_two() {
                return Err(Error::domain(op, format!("M = {m} must be a power of 2")));
            }
            Ok(m as f64)
        };
        let (a, b) = match scheme {
            Modulation::Bfsk => (1.0, 1.0),
            Modulation::Bpsk => (1.0, 2.0),
            Modulation::Qpsk => (2.0, 1.0),
            Modulation::Pam(m) => {
                let m = order(m, false)?;
                (2.0 * (m - 1.0) / m, 6.0 / (m * m - 1.0))
            }
            Modulation::Psk(m) => {
                let m = order(m, true)?;
                let s = (PI / m).sin();
                (2.0, 2.0 * s * s)
            }
            Modulation::RectQam(m) => {
                let m = order(m, true)?;
                let r = m.sqrt();
                (4.0 * (r - 1.0) / r, 3.0 / (m - 1.0))
            }
            Modulation::NonRectQam(m) => {
                let m = order(m, true)?;
                (4.0, 3.0 / (m - 1.0))
            }
        };
        Ok(ModulationSpec { scheme, a, b })
    }

    pub fn scheme(&self) -> Modulation {
        self.scheme
    }
    /// 𝒜
    pub fn a(&self) -> f64 {
        self.a
    }
    /// ℬ
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// A closed-form result. `out_of_range` marks values outside the range the
/// exact quantity can take, which only the approximation can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub out_of_range: bool,
}

/// `E[Σ δᵢ e^(−σᵢ·scale·γ)]` over the combined SNR.
pub fn exp_sum_average(approx: &ExpSumApprox, scale: f64, ch: &MrcChannel) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("exp_sum_average", format!("scale = {scale} must be > 0")));
    }
    let mut sum = 0.0;
    for t in approx.terms() {
        if t.delta != 0.0 {
            sum += t.delta * ch.ln_mgf(-t.sigma * scale)?.exp();
        }
    }
    Ok(sum)
}

fn require_qa(approx: &ExpSumApprox, op: &str) -> Result<()> {
    match approx.target() {
        ApproxTarget::QaSqrt(_) | ApproxTarget::Custom => Ok(()),
        t => Err(Error::Usage(format!("{op} needs a Q_a(√x) approximation, got {t:?}"))),
    }
}

/// Average error rate `𝒜·Σ δᵢ·(1+σᵢℬ/β)^(m̃−μ̃)·(1+σᵢℬ/(β−ζ))^(−m̃)`.
pub fn aber_closed_form(modulation: &ModulationSpec, approx: &ExpSumApprox, ch: &MrcChannel) -> Result<MetricValue> {
    require_qa(approx, "aber_closed_form")?;
    let value = modulation.a * exp_sum_average(approx, modulation.b, ch)?;
    Ok(MetricValue {
        value,
        out_of_range: !(0.0..=1.0).contains(&value),
    })
}

/// The same average written as `Σ Ψᵢ·₂F₁(m̃, μ̃; μ̃; ζ/(β+σᵢℬ))` and evaluated
/// through the hypergeometric series. Kept as an independent check on
/// [`aber_closed_form`].
pub fn aber_hypergeometric(modulation: &ModulationSpec, approx: &ExpSumApprox, ch: &MrcChannel) -> Result<f64> {
    require_qa(approx, "aber_hypergeometric")?;
    let mu_t = ch.mu_t();
    let ln_common = modulation.a.ln() + ch.ln_psi() + specfun::ln_gamma(mu_t)?;
    let mut sum = 0.0;
    for t in approx.terms() {
        if t.delta == 0.0 {
            continue;
        }
        let rate = ch.beta() + t.sigma * modulation.b;
        let ln_w = ln_common + t.delta.abs().ln() - mu_t * rate.ln();
        let f = specfun::gauss_2f1(ch.m_t(), mu_t, mu_t, ch.zeta() / rate)?;
        sum += t.delta.signum() * ln_w.exp() * f;
    }
    Ok(sum)
}

/// Ergodic capacity in bit/s/Hz with the tabulated `log₂(1+γ)` approximation.
pub fn acc_closed_form(ch: &MrcChannel) -> Result<MetricValue> {
    let approx = ExpSumApprox::preset(ApproxTarget::Log2Capacity)?;
    acc_closed_form_with(&approx, ch)
}

/// Ergodic capacity with a caller-supplied `log₂(1+γ)` approximation.
pub fn acc_closed_form_with(approx: &ExpSumApprox, ch: &MrcChannel) -> Result<MetricValue> {
    if let ApproxTarget::QaSqrt(_) = approx.target() {
        return Err(Error::Usage("acc needs a log2(1+x) approximation".into()));
    }
    let value = exp_sum_average(approx, 1.0, ch)?;
    Ok(MetricValue {
        value,
        out_of_range: value < 0.0,
    })
}
