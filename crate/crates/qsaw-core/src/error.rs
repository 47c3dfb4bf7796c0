//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parameter validation, engines, observables and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {qubit} out of range for {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },

    #[error("momentum {momentum} outside [-{half}, {half})")]
    MomentumOutOfRange { momentum: i64, half: i64 },

    #[error("exact engine dimension {dim} exceeds cap {cap}")]
    ExactCapExceeded { dim: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
