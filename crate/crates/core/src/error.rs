use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on an input failed. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    /// The requested computation exceeds a configured size budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("regression failed: {0}")]
    Regression(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    /// True for size-guard failures, as opposed to malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
