//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {order} exceeds the configured maximum {max}")]
    MaxJetOrderExceeded { order: usize, max: usize },
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("no value for {0}")]
    MissingValue(String),
    #[error("syntax error at {line}:{col}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        line: usize,
        col: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("cannot solve constraint for its leading coordinate: {0}")]
    UnsolvableLeading(String),
    #[error("generator is not a symmetry: {0}")]
    NotCovariant(String),
    #[error("model declares no gauge-potential field to act as connection")]
    NoConnectionField,
    #[error("on-shell decomposition failed: {0}")]
    OnShellDecompositionFailed(String),
    #[error("expression is not linear in {0}")]
    NotLinear(String),
}

pub type Result<T> = std::result::Result<T, JetError>;
