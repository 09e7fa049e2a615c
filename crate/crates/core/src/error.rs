use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("chain of {n_spins} spins exceeds the supported maximum of {max} (dimension guard)")]
    TooManySpins { n_spins: usize, max: usize },

    #[error("spin index {index} out of range for a chain of {n_spins} spins")]
    SpinIndexOutOfRange { index: usize, n_spins: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed at coupling sums b = {coupling_sums:?}")]
    Eigensolver { coupling_sums: Vec<f64> },

    #[error("trajectory became non-finite at step {step} (|R| = {r_norm})")]
    NonFiniteTrajectory { step: usize, r_norm: f64 },

    #[error("{excluded} of {total} samples aborted, above the 0.1% tolerance")]
    TooManyExclusions { excluded: usize, total: usize },

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("damped-cosine fit did not converge (residual norm {residual})")]
    FitFailed { residual: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
