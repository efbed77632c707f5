use agil_audit_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn openclaw_json() -> CString {
    let v: serde_json::Value =
        serde_json::from_str(include_str!("../../core/data/reference/openclaw-audit.json")).unwrap();
    CString::new(v["payload"].to_string()).unwrap()
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { agil_string_free(s) };
    out
}

fn last_error() -> String {
    let p = agil_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load() -> *mut AgilAudit {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { agil_audit_from_json(openclaw_json().as_ptr(), &mut h) }, AgilStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn coverage_counts_through_handle() {
    let h = load();
    let mut rev = 0;
    assert_eq!(unsafe { agil_audit_revision(h, &mut rev) }, AgilStatus::Ok);
    assert_eq!(rev, 1);
    let mut c = AgilCoverage::default();
    assert_eq!(unsafe { agil_audit_coverage(h, AgilScenario::Baseline, &mut c) }, AgilStatus::Ok);
    assert_eq!(c.by_type, [9, 3, 0, 0]);
    assert_eq!(c.by_pillar, [5, 3, 3, 1]);
    assert_eq!((c.present, c.total), (12, 64));
    for (s, want) in [(AgilScenario::Strict, 11), (AgilScenario::Generous, 19)] {
        assert_eq!(unsafe { agil_audit_coverage(h, s, &mut c) }, AgilStatus::Ok);
        assert_eq!(c.present, want);
    }
    unsafe { agil_audit_free(h) };
}

#[test]
fn report_strings_are_deterministic() {
    let h = load();
    let at = CString::new("2026-01-01T00:00:00Z").unwrap();
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { agil_audit_report_json(h, AgilScenario::Baseline, at.as_ptr(), &mut a) }, AgilStatus::Ok);
    assert_eq!(unsafe { agil_audit_report_json(h, AgilScenario::Baseline, at.as_ptr(), &mut b) }, AgilStatus::Ok);
    let (a, b) = (take(a), take(b));
    assert_eq!(a, b);
    assert!(a.contains("\"generated_at\":\"2026-01-01T00:00:00Z\""));
    let mut md = ptr::null_mut();
    assert_eq!(unsafe { agil_audit_report_markdown(h, AgilScenario::Strict, ptr::null(), &mut md) }, AgilStatus::Ok);
    assert!(take(md).contains("11/64 sub-functions present"));
    unsafe { agil_audit_free(h) };
}

#[test]
fn kappa_from_counts_matches_hand_computation() {
    let mut k = AgilKappa::default();
    assert_eq!(unsafe { agil_kappa_from_counts(10, 2, 2, 50, &mut k) }, AgilStatus::Ok);
    // p_o = 60/64, p_e = (12*12 + 52*52)/64^2, kappa = (p_o - p_e)/(1 - p_e)
    let p_o = 60.0 / 64.0;
    let p_e = (144.0 + 2704.0) / 4096.0;
    assert_eq!(k.n, 64);
    assert!((k.p_o - p_o).abs() < 1e-12);
    assert!((k.kappa - (p_o - p_e) / (1.0 - p_e)).abs() < 1e-12);
    assert!((k.pabak - 0.875).abs() < 1e-12);

    assert_eq!(unsafe { agil_kappa_from_counts(0, 0, 0, 64, &mut k) }, AgilStatus::Ok);
    assert!(!k.kappa_defined);
    assert!(k.kappa.is_nan());
    assert_eq!(k.pabak, 1.0);

    assert_eq!(unsafe { agil_kappa_from_counts(0, 0, 0, 0, &mut k) }, AgilStatus::Validation);
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { agil_audit_from_json(bad.as_ptr(), &mut h) }, AgilStatus::MalformedJson);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let invalid = CString::new(r#"{"schema_version":"9","audit_id":"x","revision":1,"ecosystem":{"name":"x"}}"#).unwrap();
    assert_eq!(unsafe { agil_audit_from_json(invalid.as_ptr(), &mut h) }, AgilStatus::Validation);
    assert!(last_error().contains("unsupported-schema"));

    assert_eq!(unsafe { agil_audit_from_json(ptr::null(), &mut h) }, AgilStatus::NullPointer);
    let mut rev = 0;
    assert_eq!(unsafe { agil_audit_revision(ptr::null(), &mut rev) }, AgilStatus::NullPointer);

    let h = load();
    let mut k = AgilKappa::default();
    assert_eq!(unsafe { agil_audit_kappa(h, &mut k) }, AgilStatus::Precondition);
    unsafe { agil_audit_free(h) };

    let unknown = CString::new("no-such-dataset").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { agil_reference_json(unknown.as_ptr(), &mut out) }, AgilStatus::NotFound);
    assert!(out.is_null());

    unsafe { agil_audit_free(ptr::null_mut()) };
    unsafe { agil_string_free(ptr::null_mut()) };
}

#[test]
fn taxonomy_and_reference_json() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { agil_taxonomy_json(&mut out) }, AgilStatus::Ok);
    let t: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(t["cells"].as_array().unwrap().len(), 16);
    assert_eq!(t["slots"].as_array().unwrap().len(), 64);

    let id = CString::new("borderline-registry-c2").unwrap();
    assert_eq!(unsafe { agil_reference_json(id.as_ptr(), &mut out) }, AgilStatus::Ok);
    let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(r["payload"].as_array().unwrap().len(), 8);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/agil.h")
}

#[test]
fn generated_header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct AgilAudit AgilAudit;",
        "agil_audit_from_json",
        "agil_audit_free",
        "agil_audit_revision",
        "agil_audit_report_json",
        "agil_audit_report_markdown",
        "agil_audit_coverage",
        "agil_audit_kappa",
        "agil_kappa_from_counts",
        "agil_taxonomy_json",
        "agil_reference_json",
        "agil_last_error_message",
        "agil_string_free",
        "AGIL_STATUS_NOT_FOUND",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(header())
        .status()
    else {
        eprintln!("no C compiler on PATH; header syntax check not run");
        return;
    };
    assert!(status.success());
}
