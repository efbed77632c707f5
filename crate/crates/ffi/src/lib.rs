//! C ABI over the audit engine.
//!
//! Documents live behind an opaque `AgilAudit` handle. Every fallible call
//! returns an `AgilStatus`; the message for the most recent failure on the
//! calling thread is available from `agil_last_error_message`. Strings handed
//! out by this library must be released with `agil_string_free`.

use agil_audit::datasets::load_reference;
use agil_audit::error::AuditError;
use agil_audit::reliability::{reliability_stats, stats_from_matrix, AgreementMatrix, ReliabilityStats, SlotFilter};
use agil_audit::reporting::{canonical_json, export_bundle, render_markdown};
use agil_audit::scoring::{apply_scenario, Scenario};
use agil_audit::service::{consensus_of, require_valid, run_pipeline, AuditDocument, PipelineOptions};
use agil_audit::coverage::compute_coverage;
use agil_audit::taxonomy::{taxonomy, Function};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgilStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedJson = 3,
    Validation = 4,
    Conflict = 5,
    NotFound = 6,
    Precondition = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgilScenario {
    Strict = 0,
    Baseline = 1,
    Generous = 2,
}

impl From<AgilScenario> for Scenario {
    fn from(s: AgilScenario) -> Scenario {
        match s {
            AgilScenario::Strict => Scenario::Strict,
            AgilScenario::Baseline => Scenario::Baseline,
            AgilScenario::Generous => Scenario::Generous,
        }
    }
}

/// Opaque audit document.
pub struct AgilAudit {
    doc: AuditDocument,
}

/// Reliability figures as doubles. `kappa` is NaN when `kappa_defined` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AgilKappa {
    pub n: u32,
    pub p_o: f64,
    pub p_e: f64,
    pub kappa_defined: bool,
    pub kappa: f64,
    pub pabak: f64,
}

/// Present counts per sub-function type and per pillar, indexed A, G, I, L.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AgilCoverage {
    pub by_type: [u32; 4],
    pub by_pillar: [u32; 4],
    pub present: u32,
    pub total: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &AuditError) -> AgilStatus {
    match e {
        AuditError::Validation { .. } => AgilStatus::Validation,
        AuditError::Conflict { .. } => AgilStatus::Conflict,
        AuditError::NotFound(_) => AgilStatus::NotFound,
        AuditError::Precondition(_) => AgilStatus::Precondition,
        AuditError::Io(_) => AgilStatus::Io,
        AuditError::Json(_) => AgilStatus::MalformedJson,
    }
}

fn fail(status: AgilStatus, message: &str) -> AgilStatus {
    set_error(message);
    status
}

fn audit_fail(e: AuditError) -> AgilStatus {
    let mut message = e.to_string();
    for d in e.diagnostics() {
        message.push_str("\n  ");
        message.push_str(&d.to_string());
    }
    fail(status_of(&e), &message)
}

/// Runs `f`, turning panics into `AgilStatus::Panic`.
fn guarded(f: impl FnOnce() -> AgilStatus) -> AgilStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == AgilStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(_) => fail(AgilStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, AgilStatus> {
    if p.is_null() {
        return Err(fail(AgilStatus::NullPointer, "null string argument"));
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(AgilStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> AgilStatus {
    if out.is_null() {
        return fail(AgilStatus::NullPointer, "null output pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: `out` checked non-null; caller provides writable storage.
            unsafe { *out = c.into_raw() };
            AgilStatus::Ok
        }
        Err(_) => fail(AgilStatus::InvalidUtf8, "output contains an interior NUL"),
    }
}

unsafe fn audit_ref<'a>(h: *const AgilAudit) -> Result<&'a AgilAudit, AgilStatus> {
    // SAFETY: non-null handles come from `agil_audit_from_json`.
    unsafe { h.as_ref() }.ok_or_else(|| fail(AgilStatus::NullPointer, "null audit handle"))
}

fn kappa_of(s: &ReliabilityStats) -> AgilKappa {
    let k = s.kappa.value();
    AgilKappa {
        n: s.n,
        p_o: s.p_o.to_f64(),
        p_e: s.p_e.to_f64(),
        kappa_defined: k.is_some(),
        kappa: k.map_or(f64::NAN, |k| k.to_f64()),
        pabak: s.pabak.to_f64(),
    }
}

/// Message for the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn agil_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agil_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses and validates an audit document. On success `*out` owns a new
/// handle to be released with `agil_audit_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_from_json(json: *const c_char, out: *mut *mut AgilAudit) -> AgilStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AgilStatus::NullPointer, "null output pointer");
        }
        let text = match unsafe { read_str(json) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        let doc: AuditDocument = match serde_json::from_str(text) {
            Ok(d) => d,
            Err(e) => return audit_fail(AuditError::Json(e)),
        };
        if let Err(e) = require_valid(&doc) {
            return audit_fail(e);
        }
        // SAFETY: `out` checked non-null.
        unsafe { *out = Box::into_raw(Box::new(AgilAudit { doc })) };
        AgilStatus::Ok
    })
}

/// # Safety
/// `audit` must be NULL or a handle from `agil_audit_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_free(audit: *mut AgilAudit) {
    if !audit.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(audit) });
    }
}

/// # Safety
/// `audit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_revision(audit: *const AgilAudit, out: *mut u64) -> AgilStatus {
    guarded(|| {
        let a = match unsafe { audit_ref(audit) } {
            Ok(a) => a,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(AgilStatus::NullPointer, "null output pointer");
        }
        // SAFETY: checked non-null.
        unsafe { *out = a.doc.revision };
        AgilStatus::Ok
    })
}

unsafe fn with_bundle(
    audit: *const AgilAudit,
    scenario: AgilScenario,
    generated_at: *const c_char,
    out: *mut *mut c_char,
    render: impl FnOnce(&agil_audit::reporting::ReportBundle) -> Result<String, AuditError>,
) -> AgilStatus {
    let a = match unsafe { audit_ref(audit) } {
        Ok(a) => a,
        Err(s) => return s,
    };
    let generated_at = if generated_at.is_null() {
        String::new()
    } else {
        match unsafe { read_str(generated_at) } {
            Ok(s) => s.to_string(),
            Err(s) => return s,
        }
    };
    let opts = PipelineOptions {
        generated_at,
        primary_scenario: scenario.into(),
        ..PipelineOptions::default()
    };
    match run_pipeline(&a.doc, &opts).and_then(|b| render(&b)) {
        Ok(text) => unsafe { write_string(out, text) },
        Err(e) => audit_fail(e),
    }
}

/// Canonical JSON report bundle. `generated_at` may be NULL.
///
/// # Safety
/// `audit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_report_json(
    audit: *const AgilAudit,
    scenario: AgilScenario,
    generated_at: *const c_char,
    out: *mut *mut c_char,
) -> AgilStatus {
    guarded(|| unsafe { with_bundle(audit, scenario, generated_at, out, export_bundle) })
}

/// Markdown report. `generated_at` may be NULL.
///
/// # Safety
/// `audit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_report_markdown(
    audit: *const AgilAudit,
    scenario: AgilScenario,
    generated_at: *const c_char,
    out: *mut *mut c_char,
) -> AgilStatus {
    guarded(|| unsafe { with_bundle(audit, scenario, generated_at, out, |b| Ok(render_markdown(b))) })
}

/// Coverage counts of the consensus sheet under `scenario`.
///
/// # Safety
/// `audit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_coverage(
    audit: *const AgilAudit,
    scenario: AgilScenario,
    out: *mut AgilCoverage,
) -> AgilStatus {
    guarded(|| {
        let a = match unsafe { audit_ref(audit) } {
            Ok(a) => a,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(AgilStatus::NullPointer, "null output pointer");
        }
        let s: Scenario = scenario.into();
        let report = consensus_of(&a.doc)
            .and_then(|(c, _)| apply_scenario(&c, &a.doc.borderline_registry, s))
            .and_then(|sheet| compute_coverage(&sheet, s));
        match report {
            Ok(r) => {
                let mut c = AgilCoverage {
                    present: r.total.present,
                    total: r.total.total,
                    ..AgilCoverage::default()
                };
                for f in Function::ALL {
                    c.by_type[f.index()] = r.kind(f).present;
                    c.by_pillar[f.index()] = r.pillar(f).present;
                }
                // SAFETY: checked non-null.
                unsafe { *out = c };
                AgilStatus::Ok
            }
            Err(e) => audit_fail(e),
        }
    })
}

/// Overall reliability between the document's two rater sheets.
///
/// # Safety
/// `audit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_audit_kappa(audit: *const AgilAudit, out: *mut AgilKappa) -> AgilStatus {
    guarded(|| {
        let a = match unsafe { audit_ref(audit) } {
            Ok(a) => a,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(AgilStatus::NullPointer, "null output pointer");
        }
        let Some((x, y)) = a.doc.rater_pair() else {
            return fail(AgilStatus::Precondition, "the document does not hold two rater sheets");
        };
        match reliability_stats(x, y, SlotFilter::All) {
            Ok(s) => {
                // SAFETY: checked non-null.
                unsafe { *out = kappa_of(&s) };
                AgilStatus::Ok
            }
            Err(e) => audit_fail(e),
        }
    })
}

/// Reliability from raw 2x2 counts.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_kappa_from_counts(
    both_present: u32,
    a_only: u32,
    b_only: u32,
    both_absent: u32,
    out: *mut AgilKappa,
) -> AgilStatus {
    guarded(|| {
        if out.is_null() {
            return fail(AgilStatus::NullPointer, "null output pointer");
        }
        let m = AgreementMatrix {
            both_present,
            a_only,
            b_only,
            both_absent,
        };
        match stats_from_matrix(m, SlotFilter::All) {
            Ok(s) => {
                // SAFETY: checked non-null.
                unsafe { *out = kappa_of(&s) };
                AgilStatus::Ok
            }
            Err(e) => audit_fail(e),
        }
    })
}

/// The embedded taxonomy as canonical JSON.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_taxonomy_json(out: *mut *mut c_char) -> AgilStatus {
    guarded(|| match canonical_json(taxonomy()) {
        Ok(t) => unsafe { write_string(out, t) },
        Err(e) => audit_fail(e),
    })
}

/// A shipped reference dataset as canonical JSON.
///
/// # Safety
/// `dataset_id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agil_reference_json(dataset_id: *const c_char, out: *mut *mut c_char) -> AgilStatus {
    guarded(|| {
        let id = match unsafe { read_str(dataset_id) } {
            Ok(s) => s,
            Err(s) => return s,
        };
        match load_reference(id).and_then(|d| canonical_json(&d)) {
            Ok(t) => unsafe { write_string(out, t) },
            Err(e) => audit_fail(e),
        }
    })
}
