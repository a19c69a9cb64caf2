//! Link-level performance analysis for L-branch maximal-ratio-combining
//! receivers over κ-μ shadowed fading with additive white generalized
//! Gaussian noise (AWGGN).
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: gamma, incomplete gamma, ₁F₁, ₂F₁, Φ₂ and Bessel-I kernels.
//! - [`noise`]: the unit-variance generalized Gaussian noise model and its
//!   tail probability `Q_a`.
//! - [`fading`]: the κ-μ shadowed SNR distribution composed over `L` MRC
//!   branches, special-case mappings and a sampler.
//! - [`approx`]: exponential-sum surrogates `Σ δᵢ e^(−σᵢx)` and a
//!   least-squares fitter.
//! - [`metrics`]: closed-form average error rate and ergodic capacity.
//! - [`oracle`]: adaptive quadrature and Monte Carlo reference engines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod fading;
pub mod metrics;
pub mod noise;
pub mod oracle;
pub mod quadrature;
pub mod specfun;

pub use approx::{ApproxTarget, ExpSumApprox, ExpTerm, FitOptions, FitResult};
pub use error::{Error, Result};
pub use fading::{FadingParams, MappedParams, MrcChannel, SpecialCase};
pub use metrics::{MetricValue, Modulation, ModulationSpec};
pub use noise::{NoiseModel, NoisePreset};
pub use quadrature::{QuadratureSpec, UpperLimitPolicy};
