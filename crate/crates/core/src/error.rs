use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size {dt} exceeds the limit {limit}: {reason}")]
    StepTooLarge { dt: f64, limit: f64, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("window length must be positive, got {0}")]
    InvalidWindow(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated at t = {t}: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("trajectory {index} aborted at t = {t}: {reason}")]
    TrajectoryAborted {
        index: usize,
        t: f64,
        reason: String,
    },

    #[error("{failed} of {total} trajectories aborted (more than 1%); first: {first}")]
    EnsembleFailed {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(
        "Fock truncation N = {dim} too small: top-two-level population {population:e} at t = {t}; \
         enlarge truncation to about N = {suggested}"
    )]
    TruncationTooSmall {
        dim: usize,
        population: f64,
        t: f64,
        suggested: usize,
    },

    #[error("norm drift {drift:e} in a single step at t = {t}")]
    NormDrift { drift: f64, t: f64 },

    #[error("time grids differ: {0}")]
    GridMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
