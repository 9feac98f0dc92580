use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coupling is at or above the critical value, where no minimizer exists.
    #[error("supercritical coupling: tau = {tau} >= tau_c = {tau_c}")]
    Supercritical { tau: f64, tau_c: f64 },

    /// An integrator or root finder failed to converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// The requested accuracy cannot be reached with the configured resolution.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A conditional bound was requested outside the regime where it holds.
    #[error("invalid regime: {condition} ({detail})")]
    InvalidRegime { condition: &'static str, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by arguments rather than numerical failure.
    pub fn is_domain_violation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Supercritical { .. } | Error::InvalidRegime { .. })
    }
}
