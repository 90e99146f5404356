use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("iteration cap of {0} reached before convergence")]
    MaxIter(usize),

    #[error("degenerate rate constraint: denominator {0:e}")]
    DegenerateConstraint(f64),

    #[error("could not bracket the power multiplier: {0}")]
    BracketFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
