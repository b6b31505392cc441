use thiserror::Error;

/// Errors produced by the library.
///
/// Protocol-level "Fail" answers are not errors; they are reported through
/// [`crate::protocols::ProtocolOutcome::Fail`] and
/// [`crate::doc_exchange::Recovery::Fail`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} is not in the metric space")]
    UnknownPoint(u32),

    #[error("degenerate metric space: {0}")]
    DegenerateSpace(&'static str),

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("resource budget exceeded: {0}")]
    ResourceExceeded(String),

    #[error("corrupted input: {0}")]
    Corruption(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("wire format error: {0}")]
    Wire(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
