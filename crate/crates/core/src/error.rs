use thiserror::Error;

use crate::algebra::ValidationReport;

/// Errors raised by structural or numerical faults.
///
/// Numeric validity problems of otherwise well-formed data are reported
/// through [`ValidationReport`]; this enum is for inputs an operation cannot
/// work with at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    Shape {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("algebra mismatch: expected blocks {expected:?}, found {found:?}")]
    AlgebraMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("block {block} is not unitary (residual {residual:e})")]
    NotUnitary { block: usize, residual: f64 },

    #[error("not a unital *-homomorphism: {axiom} fails with residual {residual:e}")]
    NotHomomorphism { axiom: &'static str, residual: f64 },

    #[error("multiplicity of source block {y} in target block {x} is not integral ({value})")]
    NonIntegralMultiplicity { y: usize, x: usize, value: f64 },

    #[error("multiplicities violate unitality in target block {x}: {sum} != {dim}")]
    MultiplicityUnitality { x: usize, sum: usize, dim: usize },

    #[error("*-homomorphism is not in standard form (conjugator residual {0:e})")]
    NotStandardForm(f64),

    #[error("invalid state: {0}")]
    InvalidState(ValidationReport),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(ValidationReport),

    #[error("objects do not match (state residual {0:e})")]
    ObjectMismatch(f64),

    #[error("alpha normalization fails for source block {y}: sum of traces {trace}")]
    AlphaNormalization { y: usize, trace: f64 },

    #[error("alpha for ({y}, {x}) is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    AlphaNotPositive {
        y: usize,
        x: usize,
        min_eigenvalue: f64,
    },

    #[error("ξ∘Q does not factorize as a disintegration: {0}")]
    Factorization(String),

    #[error("lambda {0} outside [0, 1]")]
    InvalidWeight(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
