//! Special functions used by the fading and noise models.
//!
//! Everything here is a pure function of its arguments. Series that can
//! overflow for the parameter ranges met in MRC analysis (shape parameters
//! in the thousands) are accumulated with a running log-scale.

mod bessel;
mod gamma;
mod hypergeometric;

pub use bessel::{bessel_i, bessel_i_scaled};
pub use gamma::{ln_gamma, lower_gamma_reg, upper_gamma_reg};
pub use hypergeometric::{
    gauss_2f1, gauss_2f1_with, humbert_phi2, humbert_phi2_with, kummer_1f1, kummer_1f1_with,
    ln_kummer_1f1, ln_kummer_1f1_with, PHI2_ENVELOPE,
};

pub(crate) use hypergeometric::humbert_phi2_scaled;

use crate::error::{Error, Result};

/// Series truncation controls shared by the hypergeometric kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    rel_tol: f64,
    max_terms: usize,
}

impl Accuracy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::domain("Accuracy", format!("rel_tol {rel_tol} not in (0, 1e-3]")));
        }
        if max_terms < 50 {
            return Err(Error::domain("Accuracy", format!("max_terms {max_terms} < 50")));
        }
        Ok(Accuracy { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy {
            rel_tol: 1e-12,
            max_terms: 100_000,
        }
    }
}

/// True when `x` is 0, -1, -2, ...
pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}
