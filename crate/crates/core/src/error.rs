use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A series or iteration did not reach the requested tolerance.
    #[error("{op} did not converge after {terms} terms (partial value {partial:e})")]
    Accuracy {
        op: &'static str,
        partial: f64,
        terms: usize,
    },

    /// Arguments fall outside the region where an evaluation method is trusted.
    #[error("{op}: arguments outside the supported envelope ({detail})")]
    OutsideEnvelope { op: &'static str, detail: String },

    /// Adaptive quadrature stopped before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// Result not representable as a finite f64.
    #[error("range error in {op}: {detail}")]
    Range { op: &'static str, detail: String },

    /// A named limit (impulsive a=0, uniform a=∞) that has no proper density.
    #[error("unsupported limit: {0}")]
    UnsupportedLimit(String),

    /// No tabulated coefficients exist for the request.
    #[error("not available: {0}")]
    NotAvailable(String),

    /// Caller combined arguments in a way the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// True for the error kinds a caller can recover from by switching to a
    /// slower but more robust evaluation method.
    pub fn is_accuracy(&self) -> bool {
        matches!(
            self,
            Error::Accuracy { .. } | Error::OutsideEnvelope { .. } | Error::Quadrature { .. }
        )
    }
}
