//! Small dense complex linear algebra: tensor products, partial traces,
//! Hermitian eigendecomposition, Schmidt decomposition and entropies.

mod eigen;
mod entropy;
mod matrix;

pub use eigen::{eig_hermitian, schmidt, HermitianEigen, Schmidt};
pub use entropy::{binary_entropy, entropy, spectrum_entropy, Renyi};
pub(crate) use matrix::complete_basis;
pub use matrix::{
    inner, l2_norm, partial_trace, reduced_state, tensor, tensor_capped, ComplexMatrix,
    DensityOperator, Keep, StateVector, DEFAULT_ENTRY_CAP,
};

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("rows have unequal lengths")]
    Ragged,
    #[error("entries must be finite")]
    NonFinite,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("instance too large: {entries} entries exceeds cap {cap}")]
    TooLarge { entries: usize, cap: usize },
    #[error("factorization error: dimension {dim} is not {dim_a} x {dim_b}")]
    Factorization {
        dim: usize,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
}
