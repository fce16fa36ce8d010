use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use livsic_ffi::*;

const CLOSING: &str = r#"{"scenario": "closing", "seed": 5,
    "base": {"kind": "full_shift", "symbols": 2, "lambda": 0.6931471805599453},
    "generator": {"kind": "identity"},
    "closing": {"periods": [4, 8], "trials": 3}}"#;

fn last_error() -> String {
    let p = livsic_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(json: &str) -> *mut LivsicConfig {
    let text = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { livsic_config_from_json(text.as_ptr(), &mut cfg) }, LivsicStatus::Ok);
    cfg
}

#[test]
fn run_and_serialize() {
    let cfg = config(CLOSING);
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(livsic_run(cfg, &mut report), LivsicStatus::Ok);
        assert_eq!(livsic_report_passed(report), 1);
        assert_eq!(livsic_report_verdict_count(report), 2);
        let mut json = ptr::null_mut();
        assert_eq!(livsic_report_to_json(report, &mut json), LivsicStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        livsic_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["scenario"], "closing");
        livsic_report_free(report);
        livsic_config_free(cfg);
    }
}

#[test]
fn reports_are_written_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(CLOSING);
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(livsic_run(cfg, &mut report), LivsicStatus::Ok);
        let csv = CString::new(dir.path().join("csv").to_str().unwrap()).unwrap();
        assert_eq!(livsic_report_write(report, LivsicFormat::Csv, csv.as_ptr()), LivsicStatus::Ok);
        let json = CString::new(dir.path().join("r.json").to_str().unwrap()).unwrap();
        assert_eq!(livsic_report_write(report, LivsicFormat::Json, json.as_ptr()), LivsicStatus::Ok);
        livsic_report_free(report);
        livsic_config_free(cfg);
    }
    assert!(dir.path().join("csv/closing.csv").exists());
    assert!(dir.path().join("csv/verdicts.csv").exists());
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn errors_carry_codes_and_messages() {
    let bad = CString::new(r#"{"scenario": "closing"}"#).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(livsic_config_from_json(bad.as_ptr(), &mut cfg), LivsicStatus::ConfigInvalid);
        assert!(cfg.is_null());
        assert!(last_error().contains("missing field"), "{}", last_error());
        assert_eq!(livsic_config_from_json(ptr::null(), &mut cfg), LivsicStatus::NullPointer);
        assert_eq!(livsic_run(ptr::null(), ptr::null_mut()), LivsicStatus::NullPointer);
        assert_eq!(livsic_builtin_config(usize::MAX, &mut cfg), LivsicStatus::OutOfRange);
        assert_eq!(livsic_report_passed(ptr::null()), 0);
        livsic_config_free(ptr::null_mut());
        livsic_report_free(ptr::null_mut());
    }
}

#[test]
fn module_errors_keep_their_codes() {
    let cfg = config(
        r#"{"scenario": "reconstruct", "seed": 1,
            "base": {"kind": "torus", "matrix": [[2, 1], [1, 1]]},
            "generator": {"kind": "torus_smooth", "amplitude": 0.02},
            "conjugator": {"kind": "torus_smooth", "amplitude": 5.0}}"#,
    );
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(livsic_run(cfg, &mut report), LivsicStatus::InvalidSystem);
        livsic_config_free(cfg);
    }
    assert!(report.is_null());
    assert!(last_error().contains("too large"));
}

#[test]
fn builtin_configs_load_and_reseed() {
    assert!(livsic_builtin_config_count() >= 6);
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(livsic_builtin_config(0, &mut cfg), LivsicStatus::Ok);
        assert_eq!(livsic_config_set_seed(cfg, 99), LivsicStatus::Ok);
        livsic_config_free(cfg);
    }
    let v = unsafe { CStr::from_ptr(livsic_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/livsic.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["livsic_run", "livsic_config_from_json", "livsic_report_free", "livsic_last_error", "typedef struct LivsicReport"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).status() else {
        return;
    };
    assert!(status.success());
}
