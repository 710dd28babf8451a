use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("resonance: qubit and resonator frequencies coincide")]
    Resonance,

    #[error("no real root: {0}")]
    NoRealRoot(String),

    #[error("missing dressed-state label |{q},{n}>")]
    MissingLabel { q: usize, n: usize },

    #[error("requested {requested} labels but spectrum has only {available} states")]
    TooManyLabels { requested: usize, available: usize },

    #[error("truncation not converged: {what} changed by {change:.3e} (relative) under cutoff increase")]
    NotConverged { what: String, change: f64 },

    #[error("degenerate bias point: {0}")]
    Degenerate(String),

    #[error("step size {dt:.3e} s exceeds limit {limit:.3e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("integration diverged at t = {t:.3e} s")]
    Diverged { t: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("negative dephasing rate {gamma:.3e} 1/s (branch or sign convention error)")]
    NegativeRate { gamma: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
