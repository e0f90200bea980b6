use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("integration diverged at t = {time:.6} (|alpha| = {magnitude:.3e})")]
    Divergence { time: f64, magnitude: f64 },

    #[error("{diverged} of {total} trajectories diverged; reduce dt")]
    EnsembleDivergence { diverged: usize, total: usize },

    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("no significant spectral peak found; supply the period directly")]
    NoPeak,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("steady state is not unique: {count} eigenvalues with |lambda| < {tol:e}")]
    NonUnique { count: usize, tol: f64 },

    #[error("trace drift {drift:.3e} exceeds tolerance {tol:.1e}")]
    TraceDrift { drift: f64, tol: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no usable overlap after rescaling: {0}")]
    NoOverlap(String),

    #[error("observable not available: {0}")]
    Unavailable(String),
}
