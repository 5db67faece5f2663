//! Shared error type for the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A matrix or vector contained NaN or infinite entries.
    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },

    /// Two operands had incompatible shapes.
    #[error("shape mismatch in {context}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        context: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    /// A vector or series had a dimension inconsistent with the system.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// System matrices have inconsistent dimensions.
    #[error("bad system dimensions: {context}")]
    BadDimensions { context: String },

    /// Window length exceeds the available data.
    #[error("window length {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    /// Window length is zero or the horizon is too short to admit one.
    #[error("window length must be at least 1 (horizon {horizon}, output dimension {p})")]
    WindowTooSmall { horizon: usize, p: usize },

    /// An empty series was passed where samples are required.
    #[error("empty series in {context}")]
    EmptySeries { context: &'static str },

    /// Not enough samples to form the requested object.
    #[error("too few samples in {context}: need at least {needed}, got {got}")]
    TooFewSamples {
        context: &'static str,
        needed: usize,
        got: usize,
    },

    /// A feature window shorter than the observability index was requested
    /// where exact reconstruction is required.
    #[error("window {window} is below the observability index {nu}")]
    WindowBelowObservabilityIndex { window: usize, nu: usize },

    /// An operation was invoked outside the time regime it is valid in.
    #[error("regime violation: {context}")]
    RegimeViolation { context: String },

    /// The SVD iteration failed to converge.
    #[error("singular value decomposition did not converge ({rows}x{cols} input)")]
    SvdFailed { rows: usize, cols: usize },
}
