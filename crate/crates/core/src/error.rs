use thiserror::Error;

use crate::integrate::IntegrateError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The Hamiltonian description is malformed or not usable by the requested scheme.
    #[error("specification error: {0}")]
    Spec(String),

    /// Caller input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed in {context}: {source}")]
    Integration {
        context: String,
        #[source]
        source: IntegrateError,
    },

    /// A matrix that must be inverted along the path became (nearly) singular.
    #[error("singular coupling matrix{}: {detail}", at_time(*.t))]
    Singular { t: Option<f64>, detail: String },

    #[error("oscillator {index} has non-positive frequency {omega} at t = {t}")]
    NegativeFrequency { t: f64, index: usize, omega: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn at_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn integration(context: impl Into<String>, source: IntegrateError) -> Self {
        Error::Integration {
            context: context.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration { .. } | Error::Singular { .. } | Error::NegativeFrequency { .. }
        )
    }
}
