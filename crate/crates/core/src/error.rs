use thiserror::Error;

/// Errors raised by the analysis, generation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates its precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Non-finite or otherwise malformed numeric data.
    #[error("invalid data: {0}")]
    Data(String),

    /// Input outside the domain on which an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change of f on [{lo}, {hi}]")]
    RootNotFound { lo: f64, hi: f64 },

    #[error("eigenvalue iteration did not converge (n = {0})")]
    NoConvergence(usize),

    #[error("state became non-finite at t = {time}")]
    Divergence { time: f64 },

    /// Capacity state reached the singular set c_j <= 0 of the transformed system.
    #[error("capacity of node {node} reached {value:e} at t = {time}; transformed dynamics are singular")]
    Singularity { node: usize, value: f64, time: f64 },

    #[error("contraction-rate estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// Broad category used by front-ends to pick exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parameter { .. } | Error::Domain(_) => ErrorCategory::Usage,
            Error::Shape(_) | Error::Data(_) => ErrorCategory::Data,
            Error::RootNotFound { .. }
            | Error::NoConvergence(_)
            | Error::Divergence { .. }
            | Error::Singularity { .. }
            | Error::Estimation(_) => ErrorCategory::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

pub type Result<T> = std::result::Result<T, Error>;
