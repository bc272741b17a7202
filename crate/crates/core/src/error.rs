use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The superposition has (numerically) zero norm.
    #[error("null state: normalization radicand {radicand:e} is not above 1e-300")]
    NullState { radicand: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence in {what} after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("Fock cutoff too small: truncation bound {bound:e} exceeds 1e-6")]
    CutoffTooSmall { bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NullState { .. } => "null_state",
            Error::InvalidState(_) => "invalid_state",
            Error::Domain(_) => "domain",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Overflow(_) => "overflow",
            Error::CutoffTooSmall { .. } => "cutoff_too_small",
            Error::Config(_) => "config",
        }
    }
}
