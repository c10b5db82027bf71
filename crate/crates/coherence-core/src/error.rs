//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by construction, validation, and the feasibility solvers.
///
/// Numeric payloads are reported as `f64` regardless of the working scalar.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("data length {got} does not match {rows}x{cols}")]
    BadDataLength { rows: usize, cols: usize, got: usize },

    #[error("non-finite entry (NaN or infinity)")]
    NonFinite,

    #[error("not Hermitian: max |A - A^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("not positive semidefinite: min eigenvalue = {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("trace is not 1: got {trace}")]
    InvalidTrace { trace: f64 },

    #[error("vector is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("null state")]
    NullState,

    #[error("channel has no Kraus operators")]
    EmptyChannel,

    #[error("not trace preserving")]
    NotTracePreserving,

    #[error("invalid channel: sum K^dag K exceeds the identity")]
    InvalidChannel,

    #[error("outcome has vanishing probability")]
    VanishingProbability,

    #[error("dimension too large for enumeration: {dim} > {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("projector index set invalid: {reason}")]
    InvalidIndexSet { reason: String },

    #[error("degenerate rotation: all four block amplitudes must be nonzero")]
    DegenerateRotation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
