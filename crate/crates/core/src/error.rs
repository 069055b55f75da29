use thiserror::Error;

use crate::qstate::PureState;

/// Errors raised by state construction, measures and the roof engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("amplitude length {got} does not match product of dims {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm deviation {0:e})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("subsystem index {index} out of range for {parties} parties")]
    IndexOutOfRange { index: usize, parties: usize },

    #[error("cannot take the tensor product of an empty list")]
    EmptyTensor,

    #[error("ensemble size {size} is smaller than the state rank {rank}")]
    EnsembleTooSmall { rank: usize, size: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    /// A recursive pure-state functional came out negative beyond roundoff.
    /// This is a candidate counterexample, not a numerical failure.
    #[error("conjecture violation: pure functional value {value:e} below zero")]
    ConjectureViolation { value: f64, state: Box<PureState> },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
