//! Scenario files: one SNR sweep of one metric, stored as TOML.

use std::path::Path;

use fadekit::approx::{ApproxTarget, ExpSumApprox};
use fadekit::fading::{map_special_case, FadingParams, SpecialCase};
use fadekit::metrics::{Modulation, ModulationSpec};
use fadekit::noise::NoiseModel;
use fadekit::oracle::SimulationMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Aber,
    Acc,
    Pdf,
    Cdf,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Aber => "aber",
            Metric::Acc => "acc",
            Metric::Pdf => "pdf",
            Metric::Cdf => "cdf",
        }
    }
}

/// Modulation as written in a scenario: `"bpsk"` or `{ psk = 8 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationChoice {
    Bfsk,
    Bpsk,
    Qpsk,
    Pam(u32),
    Psk(u32),
    RectQam(u32),
    NonrectQam(u32),
}

impl ModulationChoice {
    pub fn to_modulation(self) -> Modulation {
        match self {
            ModulationChoice::Bfsk => Modulation::Bfsk,
            ModulationChoice::Bpsk => Modulation::Bpsk,
            ModulationChoice::Qpsk => Modulation::Qpsk,
            ModulationChoice::Pam(m) => Modulation::Pam(m),
            ModulationChoice::Psk(m) => Modulation::Psk(m),
            ModulationChoice::RectQam(m) => Modulation::RectQam(m),
            ModulationChoice::NonrectQam(m) => Modulation::NonRectQam(m),
        }
    }
}

/// GGN shape plus, optionally, explicit `Q_a(√x)` approximation coefficients.
/// Without coefficients the tabulated row for `shape`, rescaled to unit
/// noise variance, is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub shape: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            shape: 2.0,
            delta: None,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FadingSection {
    KappaMuShadowed { kappa: f64, mu: f64, m: f64 },
    KappaMu { kappa: f64, mu: f64 },
    EtaMu { eta: f64, mu: f64 },
    RicianShadowed { k: f64, m: f64 },
    Hoyt { q: f64 },
    Rician { k: f64 },
    NakagamiM { m: f64 },
    Rayleigh,
    OneSidedGaussian,
}

impl FadingSection {
    /// Per-branch parameters at mean SNR `mean_snr` (linear).
    pub fn params(&self, mean_snr: f64) -> fadekit::Result<FadingParams> {
        let sc = match *self {
            FadingSection::KappaMuShadowed { kappa, mu, m } => return FadingParams::new(kappa, mu, m, mean_snr),
            FadingSection::KappaMu { kappa, mu } => SpecialCase::KappaMu { kappa, mu },
            FadingSection::EtaMu { eta, mu } => SpecialCase::EtaMu { eta, mu },
            FadingSection::RicianShadowed { k, m } => SpecialCase::RicianShadowed { k, m },
            FadingSection::Hoyt { q } => SpecialCase::Hoyt { q },
            FadingSection::Rician { k } => SpecialCase::Rician { k },
            FadingSection::NakagamiM { m } => SpecialCase::NakagamiM { m },
            FadingSection::Rayleigh => SpecialCase::Rayleigh,
            FadingSection::OneSidedGaussian => SpecialCase::OneSidedGaussian,
        };
        Ok(map_special_case(sc, mean_snr)?.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Sweep {
    /// Sweep points in dB, ascending. `stop_db` is included when it lies on
    /// the step lattice.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SnrConvention {
    /// The swept value is the per-branch mean SNR γ̄.
    #[default]
    PerBranch,
    /// The swept value is the combined mean SNR Lγ̄.
    Total,
}

impl SnrConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrConvention::PerBranch => "per-branch",
            SnrConvention::Total => "total",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    #[default]
    SemiAnalytic,
    BitLevel,
}

impl McMode {
    pub fn to_mode(self) -> SimulationMode {
        match self {
            McMode::SemiAnalytic => SimulationMode::SemiAnalytic,
            McMode::BitLevel => SimulationMode::BitLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: McMode,
}

/// `"closed"`, `"quadrature-exact"`, `"quadrature-approx"` or
/// `{ mc = { samples = …, seed = … } }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Closed,
    QuadratureExact,
    QuadratureApprox,
    Mc(McSettings),
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::QuadratureExact => "quadrature-exact",
            Method::QuadratureApprox => "quadrature-approx",
            Method::Mc(McSettings { mode: McMode::SemiAnalytic, .. }) => "mc-semi-analytic",
            Method::Mc(McSettings { mode: McMode::BitLevel, .. }) => "mc-bit-level",
        }
    }
}

fn default_branches() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationChoice>,
    #[serde(default = "default_branches")]
    pub branches: u32,
    #[serde(default)]
    pub snr_convention: SnrConvention,
    #[serde(default)]
    pub method: Method,
    /// Mean SNR in dB for `pdf`/`cdf`, where the sweep runs over γ instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_snr_db: Option<f64>,
    #[serde(default)]
    pub noise: NoiseSection,
    pub fading: FadingSection,
    pub sweep: Sweep,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| CliError::Usage(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Usage(format!("scenario: {e}")))
    }

    /// Checks everything that can be checked without running the sweep.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        let Sweep { start_db, stop_db, step_db } = self.sweep;
        if !(start_db.is_finite() && stop_db.is_finite()) {
            return usage("sweep: start_db and stop_db must be finite".into());
        }
        if !(step_db > 0.0 && step_db.is_finite()) {
            return usage(format!("sweep.step_db: must be > 0, got {step_db}"));
        }
        if start_db > stop_db {
            return usage(format!("sweep: start_db {start_db} exceeds stop_db {stop_db}"));
        }
        if self.sweep.points().len() > 1_000_000 {
            return usage("sweep: more than 10^6 points".into());
        }
        if self.branches == 0 {
            return usage("branches: must be >= 1".into());
        }
        // Parameter domains, checked at a nominal SNR.
        self.fading
            .params(1.0)
            .map_err(|e| CliError::Usage(format!("fading: {e}")))?;
        if let Method::Mc(mc) = self.method {
            if mc.samples == 0 {
                return usage("method.mc.samples: must be >= 1".into());
            }
            // TOML integers are signed 64-bit.
            if mc.samples > i64::MAX as u64 || mc.seed > i64::MAX as u64 {
                return usage("method.mc: samples and seed must be below 2^63".into());
            }
        }
        match self.metric {
            Metric::Aber => {
                let Some(m) = self.modulation else {
                    return usage("modulation: required for metric = \"aber\"".into());
                };
                ModulationSpec::new(m.to_modulation()).map_err(|e| CliError::Usage(format!("modulation: {e}")))?;
                NoiseModel::new(self.noise.shape).map_err(|e| CliError::Usage(format!("noise.shape: {e}")))?;
                if matches!(self.method, Method::Closed | Method::QuadratureApprox) {
                    self.approximation()?;
                }
                if let Method::Mc(McSettings { mode: McMode::BitLevel, .. }) = self.method {
                    if self.modulation != Some(ModulationChoice::Bpsk) || self.noise.shape != 2.0 {
                        return usage("method.mc.mode: bit-level requires bpsk and noise.shape = 2".into());
                    }
                }
            }
            Metric::Acc => {
                if matches!(self.method, Method::Mc(_)) {
                    return usage("method: mc is available for metric = \"aber\" only".into());
                }
            }
            Metric::Pdf | Metric::Cdf => {
                if !matches!(self.method, Method::Closed | Method::QuadratureExact) {
                    return usage("method: pdf/cdf support \"closed\" and \"quadrature-exact\" only".into());
                }
                if self.metric == Metric::Pdf && self.method != Method::Closed {
                    return usage("method: pdf supports \"closed\" only".into());
                }
                match self.mean_snr_db {
                    Some(v) if v.is_finite() => {}
                    _ => return usage("mean_snr_db: required (finite) for pdf/cdf".into()),
                }
            }
        }
        if self.metric != Metric::Pdf && self.metric != Metric::Cdf && self.mean_snr_db.is_some() {
            return usage("mean_snr_db: only meaningful for pdf/cdf".into());
        }
        Ok(())
    }

    /// The `Q_a(√x)` approximation this scenario uses.
    pub fn approximation(&self) -> Result<ExpSumApprox, CliError> {
        let n = &self.noise;
        match (&n.delta, &n.sigma) {
            (Some(d), Some(s)) => ExpSumApprox::from_slices(d, s, ApproxTarget::QaSqrt(n.shape))
                .map_err(|e| CliError::Usage(format!("noise: {e}"))),
            (None, None) => ExpSumApprox::preset_unit_variance(n.shape)
                .map_err(|e| CliError::Usage(format!("noise.shape: {e}; give noise.delta and noise.sigma"))),
            _ => Err(CliError::Usage("noise: delta and sigma must be given together".into())),
        }
    }
}

pub fn parse_scenario_file(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Scenario::from_toml(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}
