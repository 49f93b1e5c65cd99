use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use reekit_core::ingest::ImportError;
use reekit_core::{DomainError, ErrorCode, FitError, IngestError, StoreError, VizError};
use serde::{Deserialize, Serialize};

/// JSON error body. `code` is always one of the library error names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    #[serde(skip)]
    pub status: u16,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { code: code.to_string(), message: message.into(), detail: None, status: status.as_u16() }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", what)
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    fn from_code<E: ErrorCode + std::fmt::Display>(status: StatusCode, err: &E) -> Self {
        Self::new(status, err.code(), err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::NotFound(_) => Self::from_code(StatusCode::NOT_FOUND, &e),
            StoreError::Io(_) | StoreError::Corrupt { .. } => {
                tracing::error!(error = %e, "dataset store failure");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.code(), "dataset store failure")
            }
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let mut err = Self::from_code(StatusCode::BAD_REQUEST, &e);
        match &e {
            IngestError::DuplicateSampleIds(ids) => err.detail = Some(serde_json::json!(ids)),
            IngestError::AmbiguousColumn { columns, .. } => err.detail = Some(serde_json::json!(columns)),
            _ => {}
        }
        err
    }
}

impl From<ImportError> for ApiError {
    fn from(e: ImportError) -> Self {
        match e {
            ImportError::Ingest(e) => e.into(),
            ImportError::Store(e) => e.into(),
        }
    }
}

impl From<FitError> for ApiError {
    fn from(e: FitError) -> Self {
        Self::from_code(StatusCode::BAD_REQUEST, &e)
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let mut err = Self::from_code(StatusCode::BAD_REQUEST, &e);
        if let DomainError::UnknownCategory { available, .. } = &e {
            err.detail = Some(serde_json::json!({ "available": available }));
        }
        err
    }
}

impl From<VizError> for ApiError {
    fn from(e: VizError) -> Self {
        match e {
            VizError::Domain(d) => d.into(),
            other => Self::from_code(StatusCode::BAD_REQUEST, &other),
        }
    }
}
