//! κ-μ shadowed SNR distribution, its `L`-branch MRC composition and the
//! classical fading models it contains.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::quadrature::{self, HalfLine, QuadratureSpec};
use crate::specfun::{self, humbert_phi2_scaled, Accuracy};

/// Stand-in for κ → 0.
pub const KAPPA_SURROGATE: f64 = 1e-9;

/// Stand-in for m → ∞ given the cluster count μ.
pub fn m_surrogate(mu: f64) -> f64 {
    1e4 * (mu + 1.0)
}

/// Densities whose logarithm falls below this are reported as 0.
pub const LN_UNDERFLOW: f64 = -700.0;

/// Per-branch κ-μ shadowed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    kappa: f64,
    mu: f64,
    m: f64,
    mean_snr: f64,
}

impl FadingParams {
    pub fn new(kappa: f64, mu: f64, m: f64, mean_snr: f64) -> Result<Self> {
        let op = "FadingParams";
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::domain(op, format!("kappa = {kappa} must be finite and >= 0")));
        }
        for (name, v) in [("mu", mu), ("m", m), ("mean_snr", mean_snr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(op, format!("{name} = {v} must be finite and > 0")));
            }
        }
        Ok(FadingParams { kappa, mu, m, mean_snr })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    pub fn with_mean_snr(&self, mean_snr: f64) -> Result<Self> {
        FadingParams::new(self.kappa, self.mu, self.m, mean_snr)
    }
}

/// Density value with an underflow marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub value: f64,
    pub underflow: bool,
}

/// Output SNR of an `L`-branch MRC receiver with i.i.d. κ-μ shadowed branches.
///
/// The combined SNR is again κ-μ shadowed with `μ̃ = Lμ`, `m̃ = Lm` and
/// mean `η̃ = Lγ̄`; κ is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcChannel {
    params: FadingParams,
    branches: u32,
    mu_t: f64,
    m_t: f64,
    eta_t: f64,
    ln_psi: f64,
    beta: f64,
    zeta: f64,
    pole: f64,
}

impl MrcChannel {
    pub fn new(params: FadingParams, branches: u32) -> Result<Self> {
        if branches == 0 {
            return Err(Error::domain("MrcChannel", "branches must be >= 1"));
        }
        let l = branches as f64;
        let FadingParams { kappa, mu, m, mean_snr } = params;
        let mu_t = l * mu;
        let m_t = l * m;
        let eta_t = l * mean_snr;
        let beta = mu_t * (1.0 + kappa) / eta_t;
        let r = mu_t * kappa / m_t;
        // β − ζ = β/(1 + μ̃κ/m̃), formed without subtraction.
        let pole = beta / (1.0 + r);
        let zeta = beta * r / (1.0 + r);
        let ln_psi = mu_t * (mu_t / eta_t).ln() + mu_t * kappa.ln_1p() - m_t * r.ln_1p()
            - specfun::ln_gamma(mu_t)?;
        if !(beta.is_finite() && beta > 0.0 && ln_psi.is_finite()) {
            return Err(Error::Range {
                op: "MrcChannel",
                detail: format!("derived coefficients not finite (beta = {beta}, ln psi = {ln_psi})"),
            });
        }
        Ok(MrcChannel {
            params,
            branches,
            mu_t,
            m_t,
            eta_t,
            ln_psi,
            beta,
            zeta,
            pole,
        })
    }

    pub fn params(&self) -> &FadingParams {
        &self.params
    }
    pub fn branches(&self) -> u32 {
        self.branches
    }
    pub fn mu_t(&self) -> f64 {
        self.mu_t
    }
    pub fn m_t(&self) -> f64 {
        self.m_t
    }
    pub fn eta_t(&self) -> f64 {
        self.eta_t
    }
    pub fn ln_psi(&self) -> f64 {
        self.ln_psi
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    /// `β − ζ`, the abscissa of the MGF's dominant pole.
    pub fn pole(&self) -> f64 {
        self.pole
    }
    /// Mean combined SNR, `Lγ̄`.
    pub fn mean(&self) -> f64 {
        self.eta_t
    }

    /// Natural log of the combined-SNR density.
    pub fn ln_pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain("pdf", format!("gamma = {gamma} must be >= 0")));
        }
        if gamma == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if gamma == 0.0 {
            return Ok(if self.mu_t == 1.0 {
                self.ln_psi
            } else if self.mu_t > 1.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
        }
        let z = self.zeta * gamma;
        let ln_f = if z > 0.0 {
            specfun::ln_kummer_1f1_with(self.m_t, self.mu_t, z, &Accuracy::default())?
        } else {
            0.0
        };
        Ok(self.ln_psi + (self.mu_t - 1.0) * gamma.ln() - self.beta * gamma + ln_f)
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        Ok(self.pdf_flagged(gamma)?.value)
    }

    /// Density with an explicit flag when the value underflowed to 0.
    pub fn pdf_flagged(&self, gamma: f64) -> Result<Density> {
        let ln = self.ln_pdf(gamma)?;
        if ln < LN_UNDERFLOW {
            Ok(Density {
                value: 0.0,
                underflow: ln > f64::NEG_INFINITY,
            })
        } else {
            Ok(Density {
                value: ln.exp(),
                underflow: false,
            })
        }
    }

    /// Power of the density's leading behaviour `γ^(μ̃−1)` near 0, when singular.
    fn head_power(&self) -> Option<f64> {
        (self.mu_t < 1.0).then_some(self.mu_t)
    }

    /// Combined-SNR distribution function.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        self.cdf_with(gamma, &QuadratureSpec::default())
    }

    /// As [`MrcChannel::cdf`], with the fallback quadrature configured.
    pub fn cdf_with(&self, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain("cdf", format!("gamma = {gamma} must be >= 0")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        if gamma == f64::INFINITY {
            return Ok(1.0);
        }
        match self.cdf_series(gamma) {
            Ok(v) => Ok(v),
            Err(e) if e.is_accuracy() => self.cdf_quadrature(gamma, spec),
            Err(e) => Err(e),
        }
    }

    fn cdf_series(&self, gamma: f64) -> Result<f64> {
        let (ln_pref, s) = humbert_phi2_scaled(
            self.mu_t - self.m_t,
            self.m_t,
            self.mu_t + 1.0,
            -self.beta * gamma,
            -self.pole * gamma,
            &Accuracy::default(),
        )?;
        let v = (self.ln_psi + self.mu_t * gamma.ln() - self.mu_t.ln() + ln_pref).exp() * s;
        if v.is_finite() {
            Ok(v.clamp(0.0, 1.0))
        } else {
            Err(Error::Accuracy {
                op: "cdf",
                partial: v,
                terms: 0,
            })
        }
    }

    fn cdf_quadrature(&self, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
        let f = |g: f64| self.pdf(g);
        if gamma <= self.eta_t {
            let est = quadrature::integrate_from_zero(f, gamma, self.head_power(), spec)?;
            return Ok(est.value.clamp(0.0, 1.0));
        }
        let dom = HalfLine {
            breakpoints: vec![self.eta_t],
            scale: self.eta_t,
            head_power: None,
        };
        let tail = quadrature::integrate_half_line(|t| self.pdf(gamma + t), &dom, spec)?;
        Ok((1.0 - tail.value).clamp(0.0, 1.0))
    }

    /// Distribution function at many points, sorted ascending.
    ///
    /// The first point is evaluated directly and the remaining ones by
    /// integrating the density across each gap.
    pub fn cdf_sorted(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("cdf_sorted", "points must be sorted ascending"));
        }
        let spec = QuadratureSpec::default();
        let mut out = Vec::with_capacity(points.len());
        let Some(&first) = points.first() else {
            return Ok(out);
        };
        let mut acc = self.cdf(first)?;
        out.push(acc);
        for w in points.windows(2) {
            if w[1] > w[0] {
                if w[0] == 0.0 {
                    acc = self.cdf(w[1])?;
                } else {
                    acc += quadrature::integrate(|g| self.pdf(g), w[0], w[1], &spec)?.value;
                }
            }
            out.push(acc.min(1.0));
        }
        Ok(out)
    }

    /// ln E[e^(sγ)] for `s < β − ζ`.
    pub fn ln_mgf(&self, s: f64) -> Result<f64> {
        if !(s < self.pole) {
            return Err(Error::domain(
                "mgf",
                format!("s = {s} is at or beyond the pole {}", self.pole),
            ));
        }
        Ok((self.m_t - self.mu_t) * (-s / self.beta).ln_1p() - self.m_t * (-s / self.pole).ln_1p())
    }

    /// E[e^(sγ)] for `s < β − ζ`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        Ok(self.ln_mgf(s)?.exp())
    }

    pub fn sampler(&self) -> Result<SnrSampler> {
        SnrSampler::new(self)
    }

    /// `n` i.i.d. combined-SNR draws.
    pub fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        let s = self.sampler()?;
        Ok((0..n).map(|_| s.draw(rng)).collect())
    }
}

/// Poisson–gamma mixture sampler for the combined SNR.
#[derive(Debug, Clone)]
pub struct SnrSampler {
    shadow: Gamma<f64>,
    mu_t: f64,
    mu_kappa: f64,
    scale: f64,
}

impl SnrSampler {
    pub fn new(ch: &MrcChannel) -> Result<Self> {
        let shadow = Gamma::new(ch.m_t, 1.0 / ch.m_t)
            .map_err(|e| Error::domain("sample_snr", e.to_string()))?;
        let kappa = ch.params.kappa;
        Ok(SnrSampler {
            shadow,
            mu_t: ch.mu_t,
            mu_kappa: ch.mu_t * kappa,
            scale: ch.eta_t / (2.0 * ch.mu_t * (1.0 + kappa)),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi2 = self.shadow.sample(rng);
        let lambda = self.mu_kappa * xi2;
        let p = if lambda > 0.0 {
            Poisson::new(lambda).map(|d| d.sample(rng)).unwrap_or(0.0)
        } else {
            0.0
        };
        // Shape is at least μ̃ > 0 and the scale is fixed, so this cannot fail.
        let w = Gamma::new(self.mu_t + p, 2.0).expect("valid gamma shape").sample(rng);
        self.scale * w
    }
}

/// Classical fading models embedded in the κ-μ shadowed family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialCase {
    KappaMu { kappa: f64, mu: f64 },
    EtaMu { eta: f64, mu: f64 },
    RicianShadowed { k: f64, m: f64 },
    Hoyt { q: f64 },
    Rician { k: f64 },
    NakagamiM { m: f64 },
    Rayleigh,
    OneSidedGaussian,
}

/// Result of [`map_special_case`], with any finite stand-ins that were used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedParams {
    pub params: FadingParams,
    pub kappa_surrogate: Option<f64>,
    pub m_surrogate: Option<f64>,
}

impl SpecialCase {
    pub fn map(&self, mean_snr: f64) -> Result<MappedParams> {
        map_special_case(*self, mean_snr)
    }
}

pub fn map_special_case(sc: SpecialCase, mean_snr: f64) -> Result<MappedParams> {
    let op = "map_special_case";
    let unit = |name: &str, v: f64| -> Result<()> {
        if v > 0.0 && v <= 1.0 {
            Ok(())
        } else {
            Err(Error::domain(op, format!("{name} = {v} must lie in (0, 1]")))
        }
    };
    let nonneg = |name: &str, v: f64| -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(op, format!("{name} = {v} must be finite and >= 0")))
        }
    };
    let (kappa, mu, m, ks, ms) = match sc {
        SpecialCase::KappaMu { kappa, mu } => {
            let m = m_surrogate(mu);
            (kappa, mu, m, None, Some(m))
        }
        SpecialCase::EtaMu { eta, mu } => {
            unit("eta", eta)?;
            ((1.0 - eta) / (2.0 * eta), 2.0 * mu, mu, None, None)
        }
        SpecialCase::RicianShadowed { k, m } => {
            nonneg("K", k)?;
            (k, 1.0, m, None, None)
        }
        SpecialCase::Hoyt { q } => {
            unit("q", q)?;
            let q2 = q * q;
            ((1.0 - q2) / (2.0 * q2), 1.0, 0.5, None, None)
        }
        SpecialCase::Rician { k } => {
            nonneg("K", k)?;
            let m = m_surrogate(1.0);
            (k, 1.0, m, None, Some(m))
        }
        SpecialCase::NakagamiM { m } => {
            let ms = m_surrogate(m);
            (KAPPA_SURROGATE, m, ms, Some(KAPPA_SURROGATE), Some(ms))
        }
        SpecialCase::Rayleigh => {
            let ms = m_surrogate(1.0);
            (KAPPA_SURROGATE, 1.0, ms, Some(KAPPA_SURROGATE), Some(ms))
        }
        SpecialCase::OneSidedGaussian => {
            let ms = m_surrogate(0.5);
            (KAPPA_SURROGATE, 0.5, ms, Some(KAPPA_SURROGATE), Some(ms))
        }
    };
    Ok(MappedParams {
        params: FadingParams::new(kappa, mu, m, mean_snr)?,
        kappa_surrogate: ks,
        m_surrogate: ms,
    })
}
