use thiserror::Error;

use crate::domain::Validation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("unknown seriousness level `{0}`")]
    UnknownLevel(String),
    #[error("unknown scholarship status `{0}`")]
    UnknownStatus(String),
    #[error("unknown review decision `{0}`")]
    UnknownDecision(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("integrity violation: {0}")]
    IntegrityViolation(String),
    #[error("duplicate key: {0}")]
    DuplicateKey(String),
    #[error("validation failed for {kind} `{id}`: {validation}")]
    ValidationFailed {
        kind: &'static str,
        id: String,
        validation: Validation,
    },
    #[error("{kind} `{id}` cannot be deleted")]
    DeletionForbidden { kind: &'static str, id: String },
    #[error("seed file {file}: {message}")]
    Seed { file: String, message: String },
    #[error("store file is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
