use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the range the operation is defined for.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The operation has no closed form for this covariance family.
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorization or quadrature failed to produce a finite result.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    /// Fewer than two design points fall inside `[x - h, x + h]`.
    #[error("empty smoothing window at x = {x} with h = {h} ({count} design point(s) inside)")]
    EmptyWindow { x: f64, h: f64, count: usize },

    #[error("weights at x = {x} carry no mass (sum = {sum:e}); cannot renormalize")]
    ZeroMass { x: f64, sum: f64 },

    /// The curvature integral of the regression function vanishes.
    #[error("degenerate curvature: integral of g''^2 w is {0:e}, optimal bandwidth formula does not apply")]
    DegenerateCurvature(f64),

    #[error("need at least 2 replicates, got {0}")]
    InsufficientReplicates(usize),

    #[error("too many skipped evaluation points: {skipped} of {total} exceed the 5% limit")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
