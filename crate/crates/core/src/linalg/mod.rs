//! Sparse matrices and the linear solvers used by the finite element code.

mod cg;
mod csr;
mod direct;

pub use cg::{cg_solve, CgOutcome};
pub use csr::{CsrMatrix, Triplet};
pub use direct::{direct_solve, relative_residual};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("row {row} has non-positive diagonal entry {value}")]
    BadDiagonal { row: usize, value: f64 },
    #[error("CG did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is numerically singular: {0}")]
    Singular(String),
    #[error("invalid solver parameter: {0}")]
    Parameter(String),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
