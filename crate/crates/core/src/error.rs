use std::path::PathBuf;

use thiserror::Error;

use crate::linalg::Representation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch {
        expected: Representation,
        found: Representation,
    },

    #[error("{n_qubits} qubits exceeds the dense-matrix cap of {cap}")]
    DimensionCap { n_qubits: u32, cap: u32 },

    #[error("operator does not commute with S: max |US - SU| = {commutator:e}")]
    SymmetryViolation { commutator: f64 },

    #[error("state is not normalized: |norm - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("state vector is zero")]
    ZeroVector,

    #[error("matrix is not unitary: max |U'U - I| = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: u32 },

    #[error("eigensolver failed: {message} (max residual {residual:e})")]
    Eigen { message: String, residual: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("bad cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for configuration and input errors, 3 for
    /// failed numerical checks, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Parse { .. } | Error::DimensionCap { .. } => 2,
            Error::Check(_)
            | Error::Eigen { .. }
            | Error::NotUnitary { .. }
            | Error::SymmetryViolation { .. }
            | Error::NotNormalized { .. } => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(
            Error::Parse {
                line: 3,
                message: "x".into()
            }
            .exit_code(),
            2
        );
        assert_eq!(Error::Check("x".into()).exit_code(), 3);
        assert_eq!(Error::NotUnitary { residual: 1.0 }.exit_code(), 3);
        assert_eq!(Error::EmptySample.exit_code(), 1);
    }
}
