//! Reference engines: quadrature of the defining integrals and Monte Carlo.

pub mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::{ApproxTarget, ExpSumApprox};
use crate::error::{Error, Result};
use crate::fading::{MrcChannel, SnrSampler};
use crate::metrics::{Modulation, ModulationSpec};
use crate::noise::{GgnSampler, NoiseModel};
pub use crate::quadrature::{Estimate, QuadratureSpec, UpperLimitPolicy};
use crate::quadrature::{integrate_half_line, HalfLine};

/// Conditional error probability used inside the fading average.
#[derive(Debug, Clone, Copy)]
pub enum ConditionalQ<'a> {
    /// The exact `Q_a(x)`.
    Exact(&'a NoiseModel),
    /// An exponential sum in place of `Q_a(√x)`.
    Approx(&'a ExpSumApprox),
}

impl ConditionalQ<'_> {
    fn eval(&self, x: f64) -> f64 {
        match self {
            ConditionalQ::Exact(n) => n.q(x.sqrt()),
            ConditionalQ::Approx(a) => a.eval(x),
        }
    }
}

fn domain_for(ch: &MrcChannel, extra: &[f64]) -> HalfLine {
    let mut breakpoints = extra.to_vec();
    breakpoints.push(ch.mean());
    HalfLine {
        breakpoints,
        scale: ch.mean(),
        head_power: (ch.mu_t() < 1.0).then_some(ch.mu_t()),
    }
}

/// `∫₀^∞ f(γ)·𝒜·Q(√(ℬγ)) dγ`.
pub fn aber_quadrature(
    modulation: &ModulationSpec,
    q: ConditionalQ<'_>,
    ch: &MrcChannel,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if let ConditionalQ::Approx(a) = q {
        if matches!(a.target(), ApproxTarget::Log2Capacity) {
            return Err(Error::Usage("aber_quadrature needs a Q_a(√x) approximation".into()));
        }
    }
    let (a, b) = (modulation.a(), modulation.b());
    let dom = domain_for(ch, &[1.0 / b, 10.0 / b]);
    let mut est = integrate_half_line(
        |g| {
            let p = ch.pdf(g)?;
            Ok(if p == 0.0 { 0.0 } else { p * q.eval(b * g) })
        },
        &dom,
        spec,
    )?;
    est.value *= a;
    est.error *= a;
    Ok(est)
}

/// What stands in for `log₂(1+γ)` in the capacity integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogIntegrand {
    Exact,
    /// The tabulated exponential-sum approximation.
    Approx,
}

/// `∫₀^∞ log₂(1+γ)·f(γ) dγ`.
pub fn acc_quadrature(ch: &MrcChannel, spec: &QuadratureSpec, integrand: LogIntegrand) -> Result<Estimate> {
    let approx = match integrand {
        LogIntegrand::Exact => None,
        LogIntegrand::Approx => Some(ExpSumApprox::preset(ApproxTarget::Log2Capacity)?),
    };
    let dom = domain_for(ch, &[1.0]);
    integrate_half_line(
        |g| {
            let p = ch.pdf(g)?;
            if p == 0.0 {
                return Ok(0.0);
            }
            let c = match &approx {
                None => g.ln_1p() / std::f64::consts::LN_2,
                Some(a) => a.eval(g),
            };
            Ok(p * c)
        },
        &dom,
        spec,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    /// Average the conditional error probability over sampled SNRs.
    SemiAnalytic,
    /// Antipodal symbols, additive noise, hard decisions. BPSK with a = 2 only.
    BitLevel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Number of independent random sub-streams; fixed so results do not depend
/// on the thread count.
pub const SUBSTREAMS: u64 = 64;

/// Monte Carlo estimate of `E[𝒜·Q_a(√(ℬγ))]`.
///
/// Sub-stream `i` is ChaCha8 seeded with `seed` on stream `i`; partial sums
/// are combined in stream order.
pub fn simulate_error_rate(
    modulation: &ModulationSpec,
    noise: &NoiseModel,
    ch: &MrcChannel,
    n: u64,
    seed: u64,
    mode: SimulationMode,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::Usage("simulate_error_rate needs n >= 1".into()));
    }
    if mode == SimulationMode::BitLevel && !(modulation.scheme() == Modulation::Bpsk && noise.shape() == 2.0) {
        return Err(Error::Usage("bit-level simulation supports BPSK with a = 2 only".into()));
    }
    let sampler = ch.sampler()?;
    let ggn = GgnSampler::new(noise);
    let (a, b) = (modulation.a(), modulation.b());

    let parts: Vec<(f64, f64)> = (0..SUBSTREAMS)
        .into_par_iter()
        .map(|i| {
            let count = n / SUBSTREAMS + u64::from(i < n % SUBSTREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            match mode {
                SimulationMode::SemiAnalytic => semi_analytic(&sampler, noise, a, b, count, &mut rng),
                SimulationMode::BitLevel => (bit_errors(&sampler, &ggn, b, count, &mut rng), 0.0),
            }
        })
        .collect();

    let nf = n as f64;
    match mode {
        SimulationMode::SemiAnalytic => {
            let (s, s2) = parts.iter().fold((0.0, 0.0), |(s, s2), p| (s + p.0, s2 + p.1));
            let mean = s / nf;
            let var = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
            Ok(McEstimate {
                estimate: mean,
                std_error: (var / nf).sqrt(),
                samples: n,
            })
        }
        SimulationMode::BitLevel => {
            let errors: f64 = parts.iter().map(|p| p.0).sum();
            let p = errors / nf;
            Ok(McEstimate {
                estimate: p,
                std_error: (p * (1.0 - p) / nf).sqrt(),
                samples: n,
            })
        }
    }
}

fn semi_analytic(sampler: &SnrSampler, noise: &NoiseModel, a: f64, b: f64, count: u64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut s = 0.0;
    let mut s2 = 0.0;
    for _ in 0..count {
        let g = sampler.draw(rng);
        let v = a * noise.q((b * g).sqrt());
        s += v;
        s2 += v * v;
    }
    (s, s2)
}

fn bit_errors(sampler: &SnrSampler, ggn: &GgnSampler, b: f64, count: u64, rng: &mut ChaCha8Rng) -> f64 {
    let mut errors = 0u64;
    for _ in 0..count {
        let amp = (b * sampler.draw(rng)).sqrt();
        let bit = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let r = bit * amp + ggn.draw(rng);
        // Ties (r = 0) are decided as +1.
        let decided = if r >= 0.0 { 1.0 } else { -1.0 };
        errors += u64::from(decided != bit);
    }
    errors as f64
}
