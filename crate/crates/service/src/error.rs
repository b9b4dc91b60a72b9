use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use crate::triage::TriageError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    NotFound(String),
    #[error("{message}")]
    Conflict { message: String, detail: Option<Value> },
    #[error("{message}")]
    Validation { message: String, detail: Option<Value> },
    #[error("unauthorized")]
    Unauthorized,
    #[error("storage failure: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn validation(message: impl Into<String>) -> Self {
        ServiceError::Validation { message: message.into(), detail: None }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict { .. } => StatusCode::CONFLICT,
            ServiceError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Conflict { .. } => "conflict",
            ServiceError::Validation { .. } => "validation",
            ServiceError::Unauthorized => "unauthorized",
            ServiceError::Storage(_) => "storage",
        }
    }
}

impl From<TriageError> for ServiceError {
    fn from(e: TriageError) -> Self {
        match &e {
            TriageError::NotFound(_) => ServiceError::NotFound(e.to_string()),
            TriageError::AlreadyDecided { status, .. } => ServiceError::Conflict {
                message: e.to_string(),
                detail: Some(serde_json::json!({ "status": status })),
            },
            TriageError::Invalid(_) => ServiceError::validation(e.to_string()),
        }
    }
}

/// Uniform error body.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if let ServiceError::Storage(message) = &self {
            tracing::error!(%message, "storage failure");
        }
        let detail = match &self {
            ServiceError::Conflict { detail, .. } | ServiceError::Validation { detail, .. } => detail.clone(),
            _ => None,
        };
        let body = ErrorBody { code: self.code(), message: self.to_string(), detail };
        (self.status(), Json(body)).into_response()
    }
}
