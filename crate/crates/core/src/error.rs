use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// A single validation finding. Errors block writes, warnings are reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}[{}]: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictKind {
    DuplicateId,
    StaleRevision,
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("validation failed: {message}")]
    Validation {
        message: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("conflict: {message}")]
    Conflict { kind: ConflictKind, message: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl AuditError {
    pub fn validation(message: impl Into<String>) -> Self {
        AuditError::Validation {
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn with_diagnostics(message: impl Into<String>, diagnostics: Vec<Diagnostic>) -> Self {
        AuditError::Validation {
            message: message.into(),
            diagnostics,
        }
    }

    /// Stable machine-readable code used by the HTTP error body.
    pub fn code(&self) -> &'static str {
        match self {
            AuditError::Validation { .. } => "validation",
            AuditError::Conflict {
                kind: ConflictKind::StaleRevision,
                ..
            } => "stale-revision",
            AuditError::Conflict {
                kind: ConflictKind::DuplicateId,
                ..
            } => "duplicate-id",
            AuditError::NotFound(_) => "not-found",
            AuditError::Precondition(_) => "precondition",
            AuditError::Io(_) => "io",
            AuditError::Json(_) => "malformed-json",
        }
    }

    /// Process exit code: 1 validation, 2 conflict, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Conflict { .. } => 2,
            AuditError::Io(_) => 3,
            _ => 1,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            AuditError::Validation { diagnostics, .. } => diagnostics,
            _ => &[],
        }
    }
}

pub type Result<T, E = AuditError> = std::result::Result<T, E>;
