use thiserror::Error;

/// Errors raised by model construction, spectral analysis, propagation and
/// the experiment harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid disorder specification: {0}")]
    InvalidDisorder(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("peak depth {mu0} does not exceed the coupling {coupling}; no end-site bound state")]
    NotBound { mu0: f64, coupling: f64 },

    #[error("gap {gap:e} at t = {t} is too small for the adiabaticity ratio")]
    GapTooSmall { t: f64, gap: f64 },

    #[error("initial state is not normalized (norm² = {norm_sqr})")]
    Unnormalized { norm_sqr: f64 },

    #[error("least-squares design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("no tau <= {tau_cap} reaches fidelity {target} for N = {n_sites}")]
    TargetUnreachable {
        n_sites: usize,
        target: f64,
        tau_cap: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
