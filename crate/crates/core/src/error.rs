use thiserror::Error;

/// Errors raised by the ring-photon library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not circulant (max row-shift residual {residual:.3e})")]
    NotCirculant { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("amplitude is not normalized (bosonic norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("laser drive is not perpendicular to the ring plane (theta_L = {theta})")]
    DriveNotPerpendicular { theta: f64 },

    #[error("frequency band too narrow: W = {bandwidth} but at least {required} is needed")]
    InsufficientBandwidth { bandwidth: f64, required: f64 },

    #[error("negative value {value:.3e} at node {node} exceeds round-off allowance")]
    NegativeValue { node: usize, value: f64 },

    #[error("dense eigensolver failed to converge")]
    EigensolverFailed,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
