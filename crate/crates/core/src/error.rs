use thiserror::Error;

/// Errors raised by the numerical kernels, body/ellipsoid constructors and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("linear map is singular or too ill-conditioned")]
    SingularTransform,
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("operation does not support body variant {0}")]
    UnsupportedBodyVariant(&'static str),
    #[error("no feasible ellipse found on the search grid; refine the grid")]
    NoFeasiblePoint,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
