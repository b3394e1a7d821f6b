use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use saris_core::c45::TreeError;
use saris_core::dataset::DatasetError;
use saris_core::{StoreError, WorkflowError};
use serde::{Deserialize, Serialize};

/// Error body returned by every endpoint: `{"status", "code", "message"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing, invalid or expired session",
        )
    }

    pub fn bad_credentials() -> Self {
        Self::new(
            StatusCode::UNAUTHORIZED,
            "invalid_credentials",
            "identifier or password is incorrect",
        )
    }

    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "permission_denied", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn no_model() -> Self {
        Self::new(StatusCode::CONFLICT, "no_model", "no model has been trained yet")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn status_code(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status_code(), Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::IntegrityViolation(_) | StoreError::ValidationFailed { .. } => {
                ApiError::unprocessable("validation_failed", message)
            }
            StoreError::DuplicateKey(_) => ApiError::new(StatusCode::CONFLICT, "duplicate_key", message),
            StoreError::DeletionForbidden { .. } => ApiError::new(StatusCode::CONFLICT, "invalid_state", message),
            _ => ApiError::internal(message),
        }
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        let message = e.to_string();
        match e {
            WorkflowError::PermissionDenied { .. } => ApiError::forbidden(message),
            WorkflowError::ScopeViolation(_) => ApiError::new(StatusCode::FORBIDDEN, "scope_violation", message),
            WorkflowError::NotFound { .. } => ApiError::not_found(message),
            WorkflowError::DuplicateReview { .. } => ApiError::new(StatusCode::CONFLICT, "duplicate_review", message),
            WorkflowError::InvalidState(_) => ApiError::new(StatusCode::CONFLICT, "invalid_state", message),
            WorkflowError::AlreadyRegistered(_) => ApiError::new(StatusCode::CONFLICT, "already_registered", message),
            WorkflowError::ValidationFailed(_) => ApiError::unprocessable("validation_failed", message),
            WorkflowError::UnknownLevel(_) => ApiError::unprocessable("unknown_level", message),
            WorkflowError::NoMatchingTeacher => ApiError::unprocessable("no_matching_teacher", message),
            WorkflowError::Store(inner) => inner.into(),
        }
    }
}

impl From<DatasetError> for ApiError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::NotFound(_) => ApiError::not_found(e.to_string()),
            DatasetError::BadConfig => ApiError::unprocessable("bad_config", e.to_string()),
            _ => ApiError::unprocessable("bad_dataset", e.to_string()),
        }
    }
}

impl From<TreeError> for ApiError {
    fn from(e: TreeError) -> Self {
        let code = match e {
            TreeError::ArityMismatch { .. } => "bad_features",
            TreeError::BadConfig(_) => "bad_config",
            _ => "training_failed",
        };
        ApiError::unprocessable(code, e.to_string())
    }
}
