use thiserror::Error;

use crate::halfint::HalfInt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumber(String),

    #[error("j = {j} is not an allowed total spin for N = {n}")]
    InvalidJ { n: u32, j: HalfInt },

    #[error("cannot parse half-integer from {0:?}")]
    ParseHalfInt(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("initial state is not block-form (off-pattern element of size {0:.3e})")]
    NotBlockForm(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("full system dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("length mismatch: {0} analytic vs {1} exact states")]
    LengthMismatch(usize, usize),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
