use serde::{Deserialize, Serialize};
use std::fmt;

/// A failed structural invariant, reported by the validators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

impl Violation {
    pub fn new(rule: &str, message: impl Into<String>) -> Self {
        Violation { rule: rule.to_string(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not in span: {0}")]
    NotInSpan(String),

    #[error("conversion obstruction: {0}")]
    Conversion(String),

    #[error("deformation hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Unsupported(String),
}
