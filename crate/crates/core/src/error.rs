use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("theta = {0} lies outside the open interval (0, pi/2)")]
    ThetaDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: estimate {value}, achieved error {achieved:e} > tol {tol:e}")]
    QuadratureNonConvergence { value: f64, achieved: f64, tol: f64 },

    #[error("continuation step too coarse at z = {z}: tracked root is ambiguous (refinement needed)")]
    ContinuationAmbiguous { z: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("row operation {step}: self-scaling factor {factor:e} is not strictly positive")]
    NonPositiveScaling { step: usize, factor: f64 },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("uniqueness evidence failed: expected exactly one sign change, found {0}")]
    Uniqueness(usize),

    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("ill-conditioned fit (condition number {0:e}); resample")]
    IllConditioned(f64),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
