//! Additive white generalized Gaussian noise (AWGGN) with unit variance.
//!
//! The density is `f(x) = aΛ₀ / (2Γ(1/a)) · exp(−(Λ₀|x|)^a)` with
//! `Λ₀ = √(Γ(3/a)/Γ(1/a))`, so `a = 2` is the standard normal and `a = 1`
//! the Laplacian. The tail probability is
//! `Q_a(x) = Γ(1/a, (Λ₀x)^a) / (2Γ(1/a))`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, upper_gamma_reg};

/// Named shapes. `Impulsive` (a → 0) and `Uniform` (a → ∞) are limits that
/// have no proper unit-variance density here and cannot be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisePreset {
    Impulsive,
    Gamma,
    Laplacian,
    Gaussian,
    Uniform,
}

impl NoisePreset {
    pub fn shape(self) -> Option<f64> {
        match self {
            NoisePreset::Impulsive | NoisePreset::Uniform => None,
            NoisePreset::Gamma => Some(0.5),
            NoisePreset::Laplacian => Some(1.0),
            NoisePreset::Gaussian => Some(2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    a: f64,
    lambda0: f64,
    // ln(aΛ₀ / (2Γ(1/a)))
    ln_norm: f64,
}

impl NoiseModel {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain("NoiseModel", format!("shape a = {a} must be finite and > 0")));
        }
        let lg1 = ln_gamma(1.0 / a)?;
        let lg3 = ln_gamma(3.0 / a)?;
        let lambda0 = (0.5 * (lg3 - lg1)).exp();
        let ln_norm = a.ln() + lambda0.ln() - std::f64::consts::LN_2 - lg1;
        Ok(NoiseModel { a, lambda0, ln_norm })
    }

    pub fn gaussian() -> Self {
        Self::new(2.0).expect("a = 2 is valid")
    }

    pub fn from_preset(preset: NoisePreset) -> Result<Self> {
        match preset.shape() {
            Some(a) => Self::new(a),
            None => Err(Error::UnsupportedLimit(format!(
                "{preset:?} noise is a limiting case of the generalized Gaussian family"
            ))),
        }
    }

    pub fn shape(&self) -> f64 {
        self.a
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Generalized Q-function: P(X > x) for unit-variance X.
    pub fn q(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 {
            return 1.0 - self.q(-x);
        }
        let arg = (self.lambda0 * x).powf(self.a);
        match upper_gamma_reg(1.0 / self.a, arg) {
            Ok(v) => 0.5 * v,
            Err(_) => f64::NAN,
        }
    }

    /// P(X ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            1.0 - self.q(x)
        } else {
            self.q(-x)
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (self.ln_norm - (self.lambda0 * x.abs()).powf(self.a)).exp()
    }

    /// `n` i.i.d. draws: |X| = G^(1/a)/Λ₀ with G ~ Gamma(1/a, 1) and a fair sign.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let sampler = GgnSampler::new(self);
        (0..n).map(|_| sampler.draw(rng)).collect()
    }
}

/// Reusable per-model sampler; avoids rebuilding the gamma distribution.
#[derive(Debug, Clone, Copy)]
pub struct GgnSampler {
    gamma: Gamma<f64>,
    inv_a: f64,
    inv_lambda0: f64,
}

impl GgnSampler {
    pub fn new(noise: &NoiseModel) -> Self {
        GgnSampler {
            gamma: Gamma::new(1.0 / noise.a, 1.0).expect("shape 1/a is positive"),
            inv_a: 1.0 / noise.a,
            inv_lambda0: 1.0 / noise.lambda0,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = self.gamma.sample(rng);
        let mag = g.powf(self.inv_a) * self.inv_lambda0;
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambda0_matches_definition() {
        for &a in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            let n = NoiseModel::new(a).unwrap();
            let direct = (ln_gamma(3.0 / a).unwrap().exp() / ln_gamma(1.0 / a).unwrap().exp()).sqrt();
            assert!(((n.lambda0() - direct) / direct).abs() < 1e-13);
        }
        assert!((NoiseModel::new(1.0).unwrap().lambda0() - 2f64.sqrt()).abs() < 1e-14);
        assert!((NoiseModel::gaussian().lambda0() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn tail_anchors() {
        let g = NoiseModel::gaussian();
        assert_eq!(g.q(0.0), 0.5);
        let lap = NoiseModel::new(1.0).unwrap();
        let expect = 0.5 * (-2f64.sqrt()).exp();
        assert!((lap.q(1.0) - expect).abs() < 1e-15);
        assert!((g.q(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((g.q(-1.0) - (1.0 - 0.158_655_253_931_457_05)).abs() < 1e-15);
    }

    #[test]
    fn density_anchors() {
        let g = NoiseModel::gaussian();
        assert!((g.pdf(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let lap = NoiseModel::new(1.0).unwrap();
        assert!((lap.pdf(0.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(lap.pdf(0.7), lap.pdf(-0.7));
    }

    #[test]
    fn limits_are_rejected() {
        assert!(matches!(
            NoiseModel::from_preset(NoisePreset::Impulsive),
            Err(Error::UnsupportedLimit(_))
        ));
        assert!(NoiseModel::from_preset(NoisePreset::Uniform).is_err());
        assert_eq!(NoiseModel::from_preset(NoisePreset::Laplacian).unwrap().shape(), 1.0);
        assert!(NoiseModel::new(0.0).is_err());
        assert!(NoiseModel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn sample_sign_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = NoiseModel::new(1.5).unwrap();
        let n = 200_000;
        let pos = noise.sample(&mut rng, n).iter().filter(|&&x| x > 0.0).count();
        let p = pos as f64 / n as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }
}
