use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point, radius or stencil falls outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at the logarithmic pole of the weight function.
    #[error("logarithmic pole at z = 0")]
    Pole,

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e} with error {abs_err:e} after {panels} panels")]
    QuadratureFailure {
        estimate: f64,
        abs_err: f64,
        panels: usize,
    },

    /// A Gram matrix (or one of its leading blocks) is not positive definite.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// The Schur complement of the corner entry is numerically singular.
    #[error("Schur complement is singular (pivot {pivot} = {value:e})")]
    Singular { pivot: usize, value: f64 },

    /// A log-space evaluation produced a non-finite value.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
