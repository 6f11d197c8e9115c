use thiserror::Error;

/// An argument fell outside the domain where a formula or sampler is defined.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("domain error: {0}")]
pub struct DomainError(pub String);

impl DomainError {
    pub(crate) fn new(msg: impl Into<String>) -> Self {
        DomainError(msg.into())
    }
}
