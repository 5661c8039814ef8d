use thiserror::Error;

/// Errors raised by the kernel, quadrature, norm, bound and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested value is infinite at this point (measure-zero diagonal of a kernel).
    #[error("singular input: {0}")]
    SingularInput(String),

    /// An integrand reported a singular value away from the `v = u` edge.
    #[error("integrand singular off the diagonal at u = {u}, v = {v}")]
    PropagatedSingularity { u: f64, v: f64 },

    /// Adaptive quadrature exhausted its cell budget.
    #[error("quadrature not converged after {cells} cells: value {value:e}, error estimate {abs_error:e}")]
    NotConverged {
        value: f64,
        abs_error: f64,
        cells: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
