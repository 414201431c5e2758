use std::path::PathBuf;

use thiserror::Error;

use crate::lattice::ReducedDirection;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no data for direction ({}, {})", .0.a(), .0.b())]
    MissingDirection(ReducedDirection),

    #[error("coefficients unreachable from the data: {0:?}")]
    Unreachable(Vec<(i64, i64)>),

    #[error("DFT index {index} aliases with {n_d} samples per profile (need |index| < n_d/2)")]
    Aliasing { index: i64, n_d: usize },

    #[error("adaptive quadrature did not converge (error estimate {estimate:e}, target {tol:e})")]
    QuadratureFailure { estimate: f64, tol: f64 },

    #[error("reference has zero norm")]
    DegenerateReference,

    #[error("malformed input in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TorusError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TorusError::InvalidArgument(msg.into())
    }

    /// True for errors caused by the file system rather than by bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, TorusError::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, TorusError>;
