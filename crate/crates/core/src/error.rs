use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("preconditioner is not SPD: r^T F r = {value:e} at iteration {iteration}")]
    PreconditionerNotSpd { iteration: usize, value: f64 },

    #[error("deflation subspace error: {0}")]
    DeflationSubspace(String),

    #[error("spectral basis error: {0}")]
    Basis(String),

    #[error(
        "degenerate residual for theta_r: r0 lies in span(S_k) \
         (remaining mass {remaining:e}); fall back to the mid-range strategy"
    )]
    DegenerateResidual { remaining: f64 },

    #[error("background covariance error: {0}")]
    Covariance(String),

    #[error("stale trajectory: linearization point does not match the current iterate")]
    StaleTrajectory,

    #[error("unknown method label `{0}`")]
    UnknownMethod(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
