use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unphysical state specification: {0}")]
    UnphysicalSpec(String),

    #[error("covariance matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("covariance matrix violates the uncertainty relation (smallest symplectic eigenvalue {0})")]
    Unphysical(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order parameter s = {0} must be non-positive")]
    PositiveOrder(f64),

    #[error("ill-conditioned matrix (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("oracle outside its validity envelope: {0}")]
    OutsideEnvelope(String),

    #[error("oracle did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
