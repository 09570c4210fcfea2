//! Error types.

use thiserror::Error;

/// Failures of the dense linear-algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("empty matrix or vector")]
    Empty,
    #[error("zero vector")]
    ZeroVector,
    #[error("degenerate pairing: |<x_psi, x_phi>| = {magnitude:e} below floor {floor:e}")]
    DegeneratePairing { magnitude: f64, floor: f64 },
    #[error("singular pivot at index {index} (|pivot| = {magnitude:e})")]
    SingularPivot { index: usize, magnitude: f64 },
    #[error("non-finite value encountered")]
    NonFinite,
}

/// Failures of the ODE integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("right-hand side changed dimension: expected {expected}, found {found}")]
    RhsDimension { expected: usize, found: usize },
}

/// Failures reported by the eigensolvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not Hermitian to 1e-12; use the coupled flow for non-Hermitian input")]
    NotHermitian,
    #[error("shift {re}+{im}i is an eigenvalue to working precision (pivot {index}); perturb the shift")]
    SingularShift { re: f64, im: f64, index: usize },
    #[error("trial vector lies in the span of the deflated eigenvectors; re-seed")]
    DeflatedAway,
    #[error("the found pairs span the whole space; nothing left to deflate into")]
    SpaceExhausted,
}

/// Failures of the matrix generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("alpha_{index} has modulus {modulus} >= 1")]
    AlphaOutOfRange { index: usize, modulus: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
