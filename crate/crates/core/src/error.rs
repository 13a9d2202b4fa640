use alloc::string::String;
use core::fmt;

/// Category of a model validation failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelErrorKind {
    Schema,
    ProbabilitySum,
    DanglingReference,
    DuplicateWorld,
}

impl fmt::Display for ModelErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelErrorKind::Schema => "schema violation",
            ModelErrorKind::ProbabilitySum => "probability-sum violation",
            ModelErrorKind::DanglingReference => "dangling reference",
            ModelErrorKind::DuplicateWorld => "duplicate world",
        })
    }
}

/// A model validation failure, located by a dotted path into the document
/// (for example `worlds.w0.s3`).
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{kind} at `{path}`: {message}")]
pub struct ModelError {
    pub kind: ModelErrorKind,
    pub path: String,
    pub message: String,
}

impl ModelError {
    pub(crate) fn new(kind: ModelErrorKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError { kind, path: path.into(), message: message.into() }
    }
}

/// A formula or query that does not fit the model's signature.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SignatureError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{predicate}` has arity {expected} but was applied to {found} argument(s)")]
    ArityMismatch { predicate: String, expected: usize, found: usize },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("agent `{0}` uses an explicit relation, which takes no epsilon")]
    EpsilonOnExplicit(String),
    #[error("invalid epsilon {0}: must be finite and non-negative")]
    InvalidEpsilon(f64),
}
