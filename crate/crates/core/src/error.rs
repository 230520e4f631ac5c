use thiserror::Error;

/// Failure categories shared by every numeric routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QosError {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller broke an API contract (index order, mismatched lengths).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A queueing bound does not exist because the system is unstable.
    #[error("stability error: {message} (margin {margin})")]
    Stability { message: String, margin: f64 },
    /// A numerical method did not reach its target accuracy.
    #[error("numeric error: {message} (achieved {achieved:e})")]
    Numeric { message: String, achieved: f64 },
}

impl QosError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        QosError::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        QosError::Contract(msg.into())
    }

    pub(crate) fn stability(msg: impl Into<String>, margin: f64) -> Self {
        QosError::Stability {
            message: msg.into(),
            margin,
        }
    }

    pub(crate) fn numeric(msg: impl Into<String>, achieved: f64) -> Self {
        QosError::Numeric {
            message: msg.into(),
            achieved,
        }
    }
}

pub type Result<T> = std::result::Result<T, QosError>;
