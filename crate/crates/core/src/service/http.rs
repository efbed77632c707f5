//! HTTP/JSON API over the file store.
//!
//! Requests carrying an `X-Rater-Id` header see documents redacted for that
//! rater, so another rater's value for a slot stays hidden until both have
//! scored it.

use super::{
    create_audit, disagreements, redact_for_rater, require_valid, run_pipeline, AuditDocument, FileStore, NewAudit,
    PipelineOptions,
};
use crate::datasets::DatasetSource;
use crate::error::{AuditError, Diagnostic};
use crate::reporting::{canonical_json, render_markdown, ReportBundle};
use crate::scoring::{ReconciliationRecord, Scenario, ScoreEntry};
use crate::taxonomy::taxonomy;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const RATER_HEADER: &str = "x-rater-id";

#[derive(Debug)]
pub struct AppState {
    pub store: FileStore,
    pub datasets: DatasetSource,
}

type Shared = Arc<AppState>;

/// Error body `{code, message, detail}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: &'a str,
    detail: &'a [Diagnostic],
}

impl From<AuditError> for ApiError {
    fn from(e: AuditError) -> Self {
        let status = match &e {
            AuditError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            AuditError::Json(j) if j.classify() == serde_json::error::Category::Data => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            AuditError::Json(_) => StatusCode::BAD_REQUEST,
            AuditError::Conflict { .. } | AuditError::Precondition(_) => StatusCode::CONFLICT,
            AuditError::NotFound(_) => StatusCode::NOT_FOUND,
            AuditError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
            detail: e.diagnostics().to_vec(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code,
            message: &self.message,
            detail: &self.detail,
        };
        json_response(self.status, &body)
    }
}

type ApiResult = std::result::Result<Response, ApiError>;

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match canonical_json(value) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn ok<T: Serialize>(value: &T) -> ApiResult {
    Ok(json_response(StatusCode::OK, value))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| AuditError::Json(e).into())
}

fn rater(headers: &HeaderMap) -> Option<String> {
    headers
        .get(RATER_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
}

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(raw) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    raw.to_str()
        .ok()
        .map(|s| s.trim().trim_start_matches("W/").trim_matches('"'))
        .and_then(|s| s.parse().ok())
        .map(Some)
        .ok_or_else(|| AuditError::validation("If-Match must carry a revision number").into())
}

fn view(doc: AuditDocument, headers: &HeaderMap) -> AuditDocument {
    match rater(headers) {
        Some(r) => redact_for_rater(&doc, &r),
        None => doc,
    }
}

fn with_etag(mut resp: Response, revision: u64) -> Response {
    if let Ok(v) = HeaderValue::from_str(&format!("\"{revision}\"")) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

fn document_response(status: StatusCode, doc: AuditDocument, headers: &HeaderMap) -> ApiResult {
    let revision = doc.revision;
    Ok(with_etag(json_response(status, &view(doc, headers)), revision))
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/v1/taxonomy", get(get_taxonomy))
        .route("/api/v1/audits", get(list_audits).post(post_audit))
        .route("/api/v1/audits/{id}", get(get_audit).put(put_audit))
        .route("/api/v1/audits/{id}/sheets", post(post_sheet))
        .route("/api/v1/audits/{id}/disagreements", get(get_disagreements))
        .route("/api/v1/audits/{id}/reconciliations", post(post_reconciliation))
        .route("/api/v1/audits/{id}/report", get(get_report))
        .route("/api/v1/audits/{id}/reliability", get(get_reliability))
        .route("/api/v1/audits/{id}/media", get(get_media))
        .route("/api/v1/audits/{id}/loop", get(get_loop))
        .route("/api/v1/audits/{id}/heatmap", get(get_heatmap))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(state))).await
}

async fn get_taxonomy() -> ApiResult {
    ok(taxonomy())
}

#[derive(Serialize)]
struct AuditSummary {
    audit_id: String,
    name: String,
    revision: u64,
    sheets: usize,
}

async fn list_audits(State(st): State<Shared>) -> ApiResult {
    let mut out = Vec::new();
    for id in st.store.list()? {
        let d = st.store.get(&id)?;
        out.push(AuditSummary {
            audit_id: d.audit_id,
            name: d.ecosystem.name,
            revision: d.revision,
            sheets: d.sheets.len(),
        });
    }
    ok(&out)
}

async fn post_audit(State(st): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let meta: NewAudit = parse_body(&body)?;
    let doc = st.store.create(create_audit(meta)?)?;
    document_response(StatusCode::CREATED, doc, &headers)
}

async fn get_audit(State(st): State<Shared>, Path(id): Path<String>, headers: HeaderMap) -> ApiResult {
    document_response(StatusCode::OK, st.store.get(&id)?, &headers)
}

async fn put_audit(State(st): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let Some(expected) = if_match(&headers)? else {
        return Err(ApiError {
            status: StatusCode::PRECONDITION_REQUIRED,
            code: "precondition-required",
            message: "PUT requires an If-Match header carrying the current revision".into(),
            detail: Vec::new(),
        });
    };
    let mut replacement: AuditDocument = parse_body(&body)?;
    if replacement.audit_id != id {
        return Err(AuditError::validation("audit id in body does not match the path").into());
    }
    // A redacted client must not be able to erase entries it was never shown.
    if rater(&headers).is_some() {
        return Err(AuditError::validation("whole-document writes are not accepted during blind scoring").into());
    }
    replacement.revision = expected;
    require_valid(&replacement)?;
    let doc = st.store.update(&id, Some(expected), move |d| {
        *d = replacement;
        Ok(())
    })?;
    document_response(StatusCode::OK, doc, &headers)
}

#[derive(Deserialize)]
struct SheetSubmission {
    #[serde(default)]
    rater_id: Option<String>,
    entries: Vec<ScoreEntry>,
}

async fn post_sheet(State(st): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let sub: SheetSubmission = parse_body(&body)?;
    let rater_id = match (sub.rater_id, rater(&headers)) {
        (Some(b), Some(h)) if b != h => {
            return Err(AuditError::validation("rater_id in body does not match the X-Rater-Id header").into())
        }
        (Some(r), _) | (None, Some(r)) => r,
        (None, None) => return Err(AuditError::validation("rater_id is required").into()),
    };
    let expected = if_match(&headers)?;
    let r = rater_id.clone();
    let doc = st.store.update(&id, expected, move |d| d.submit_entries(&r, sub.entries))?;
    let revision = doc.revision;
    Ok(with_etag(json_response(StatusCode::OK, &redact_for_rater(&doc, &rater_id)), revision))
}

async fn get_disagreements(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult {
    ok(&disagreements(&st.store.get(&id)?))
}

async fn post_reconciliation(
    State(st): State<Shared>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let record: ReconciliationRecord = parse_body(&body)?;
    let expected = if_match(&headers)?;
    let slot = record.slot_id;
    let doc = st.store.update(&id, expected, move |d| {
        let disputed = disagreements(d).iter().any(|x| x.slot_id == slot);
        if !disputed {
            return Err(AuditError::with_diagnostics(
                format!("{slot} is not in the disagreement queue"),
                vec![Diagnostic::error("not-disputed", format!("{slot} has no recorded disagreement"))],
            ));
        }
        d.record_reconciliation(record);
        Ok(())
    })?;
    document_response(StatusCode::OK, doc, &headers)
}

#[derive(Deserialize, Default)]
struct ReportQuery {
    scenario: Option<String>,
    format: Option<String>,
    generated_at: Option<String>,
}

fn bundle(st: &AppState, id: &str, q: &ReportQuery) -> Result<ReportBundle, ApiError> {
    let doc = st.store.get(id)?;
    let primary_scenario = match &q.scenario {
        Some(s) => s.parse::<Scenario>()?,
        None => Scenario::Baseline,
    };
    let opts = PipelineOptions {
        generated_at: q.generated_at.clone().unwrap_or_default(),
        primary_scenario,
        datasets: st.datasets.clone(),
    };
    Ok(run_pipeline(&doc, &opts)?)
}

async fn get_report(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    let b = bundle(&st, &id, &q)?;
    match q.format.as_deref() {
        None | Some("json") => ok(&b),
        Some("markdown") | Some("md") => {
            Ok(([(header::CONTENT_TYPE, "text/markdown; charset=utf-8")], render_markdown(&b)).into_response())
        }
        Some(other) => Err(AuditError::validation(format!("unknown format {other:?}")).into()),
    }
}

async fn get_reliability(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    ok(&bundle(&st, &id, &q)?.reliability)
}

async fn get_media(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    ok(&bundle(&st, &id, &q)?.media)
}

async fn get_loop(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    ok(&bundle(&st, &id, &q)?.correction_loop)
}

async fn get_heatmap(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    ok(&bundle(&st, &id, &q)?.heatmap)
}
