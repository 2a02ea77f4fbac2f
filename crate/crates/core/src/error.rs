use thiserror::Error;

use crate::mum::MeasurementDefect;
use crate::pauli::GroupDefect;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tolerance: abs_tol={abs}, rel_tol={rel}")]
    InvalidTolerance { abs: f64, rel: f64 },

    #[error("matrix has non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is zero within tolerance")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator {index} is not a projection (residual {residual:.3e})")]
    NotProjection { index: usize, residual: f64 },

    #[error("rank mismatch: operator {index} has rank {found}, expected {expected}")]
    RankMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("partial isometry does not have the requested initial/final projection (residual {residual:.3e})")]
    NotCompatible { residual: f64 },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator does not satisfy A^{d} = I (residual {residual:.3e})")]
    OrderMismatch { d: usize, residual: f64 },

    #[error("dimension {0} is odd; anti-commuting Hermitian unitaries need an even dimension")]
    OddDimension(usize),

    #[error("hypothesis violated: {premise} (residual {residual:.3e})")]
    HypothesisViolation { premise: String, residual: f64 },

    #[error("condition fails on pair ({i}, {j}) with residual {residual:.3e}")]
    ConditionFailed { i: usize, j: usize, residual: f64 },

    #[error("projections {i} and {j} violate the isoclinic equations (residual {residual:.3e})")]
    IsoclinicViolation { i: usize, j: usize, residual: f64 },

    #[error("operator {index} is not a scalar multiple of a partial isometry on the code space (residual {residual:.3e})")]
    NotScaledIsometry { index: usize, residual: f64 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("Pauli size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("{n} qubits exceeds the dense realization cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("invalid stabilizer group: {0}")]
    InvalidGroup(GroupDefect),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(MeasurementDefect),

    #[error("measurements {m1} and {m2} are not unbiased at outcomes ({a}, {b}) (residual {residual:.3e})")]
    CrossPairFailed {
        m1: usize,
        m2: usize,
        a: usize,
        b: usize,
        residual: f64,
    },

    #[error("canonical relation `{relation}` violated at {indices:?} (residual {residual:.3e})")]
    RelationViolated {
        relation: String,
        indices: Vec<usize>,
        residual: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that report a failed check on well-formed input,
    /// as opposed to malformed input or a usage error. An invalid generator
    /// set counts as malformed input.
    pub fn is_verdict(&self) -> bool {
        matches!(
            self,
            Error::ConditionFailed { .. }
                | Error::IsoclinicViolation { .. }
                | Error::NotScaledIsometry { .. }
                | Error::CrossPairFailed { .. }
                | Error::RelationViolated { .. }
                | Error::InvalidMeasurement(_)
                | Error::HypothesisViolation { .. }
                | Error::NotCompatible { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
