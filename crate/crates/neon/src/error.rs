//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two tensors (or a tensor and a layer) disagree on shape.
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: String,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    /// A vector that must lie on the probability simplex does not.
    #[error("invalid simplex in {context}: {reason}")]
    InvalidSimplex { context: String, reason: String },

    /// Input data failed a structural precondition.
    #[error("validation failed: {0}")]
    Validation(String),

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A forward/backward pass or the training loop produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Checkpoint or schema document carries an unsupported format version.
    #[error("unsupported format version {found} (supported: {supported})")]
    FormatVersion { found: u32, supported: u32 },

    /// A checkpoint tensor failed validation on load.
    #[error("checkpoint tensor '{name}': {reason}")]
    CheckpointTensor { name: String, reason: String },

    /// A scene refers to entities unknown to the synthetic world that is asked
    /// to score it.
    #[error("foreign scene: {0}")]
    ForeignScene(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(context: impl Into<String>, expected: &[usize], got: &[usize]) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected: expected.to_vec(),
            got: got.to_vec(),
        }
    }

    pub(crate) fn simplex(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSimplex {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
