//! Governance-coverage audit engine over the sixteen-cell AGIL grid.

pub mod coverage;
pub mod datasets;
pub mod error;
pub mod evidence;
pub mod fraction;
pub mod frameworks;
pub mod media;
pub mod reliability;
pub mod reporting;
pub mod scoring;
pub mod service;
pub mod taxonomy;

pub use error::{AuditError, Diagnostic, Result};
pub use service::{run_pipeline, AuditDocument, PipelineOptions};
