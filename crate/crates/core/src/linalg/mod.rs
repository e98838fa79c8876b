//! Numerical kernel: sparse direct solves and the dense generalized eigensolver.

mod eigen;
mod sparse;

use thiserror::Error;

pub use eigen::{max_generalized_eig, DenseSymMatrix, GeneralizedEigen};
pub use sparse::{
    rcm_ordering, solve_spd, solve_sym_indefinite, Factorization, SolverOptions, SparseSymMatrix,
    SymTripletBuilder,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix or right-hand side has non-finite entries")]
    NonFinite,
    #[error("matrix is not positive definite: pivot {pivot:e} for unknown {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error(
        "matrix is singular: no usable pivot for unknown {index} (largest candidate {pivot:e})"
    )]
    Singular { index: usize, pivot: f64 },
    #[error("solve residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("B entry {index} is not positive ({value:e})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}
