//! C ABI over the experiment runner.
//!
//! Configs and reports are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a
//! [`LivsicStatus`]; on failure the message is available from
//! [`livsic_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use livsic_core::error::Error;
use livsic_core::experiments::{self, emit, ExperimentConfig, Format, Report, BUILTIN_CONFIGS};

/// Status codes. Library errors keep their numeric codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LivsicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    OutOfRange = 4,
    InvalidSystem = 10,
    InvalidPoint = 11,
    DistanceExceedsTau = 12,
    InadmissibleSplice = 13,
    BudgetExceeded = 14,
    NotClose = 15,
    SolveFailure = 16,
    NoConnectingWord = 17,
    IllConditioned = 20,
    NotCertifiable = 21,
    SingularQ = 22,
    NotStablePair = 30,
    NotFiberBunched = 31,
    NoConvergence = 32,
    TailTooLarge = 33,
    NotHomoclinic = 40,
    NotCauchy = 41,
    InsufficientPairs = 42,
    DimensionMismatch = 50,
    ConfigInvalid = 60,
    Io = 61,
}

/// Output format for [`livsic_report_write`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LivsicFormat {
    Json = 0,
    Csv = 1,
}

/// Parsed experiment configuration.
pub struct LivsicConfig(ExperimentConfig);

/// Result of running one configuration.
pub struct LivsicReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn status_of(e: &Error) -> LivsicStatus {
    use LivsicStatus::*;
    match e.code() {
        10 => InvalidSystem,
        11 => InvalidPoint,
        12 => DistanceExceedsTau,
        13 => InadmissibleSplice,
        14 => BudgetExceeded,
        15 => NotClose,
        16 => SolveFailure,
        17 => NoConnectingWord,
        20 => IllConditioned,
        21 => NotCertifiable,
        22 => SingularQ,
        30 => NotStablePair,
        31 => NotFiberBunched,
        32 => NoConvergence,
        33 => TailTooLarge,
        40 => NotHomoclinic,
        41 => NotCauchy,
        42 => InsufficientPairs,
        50 => DimensionMismatch,
        60 => ConfigInvalid,
        _ => Io,
    }
}

fn fail(status: LivsicStatus, message: impl Into<String>) -> LivsicStatus {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

fn guard(f: impl FnOnce() -> LivsicStatus) -> LivsicStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(LivsicStatus::Panic, "internal panic"))
}

fn from_result<T>(r: Result<T, Error>, ok: impl FnOnce(T)) -> LivsicStatus {
    match r {
        Ok(v) => {
            ok(v);
            LivsicStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, LivsicStatus> {
    if p.is_null() {
        return Err(fail(LivsicStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(LivsicStatus::InvalidUtf8, "string argument is not UTF-8"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn livsic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Owned by the
/// library; valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn livsic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a JSON config.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn livsic_config_from_json(json: *const c_char, out: *mut *mut LivsicConfig) -> LivsicStatus {
    guard(|| {
        if out.is_null() {
            return fail(LivsicStatus::NullPointer, "null output pointer");
        }
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        from_result(ExperimentConfig::from_json(text), |c| *out = Box::into_raw(Box::new(LivsicConfig(c))))
    })
}

/// Number of configs shipped with the library.
#[no_mangle]
pub extern "C" fn livsic_builtin_config_count() -> usize {
    BUILTIN_CONFIGS.len()
}

/// Loads built-in config `index`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn livsic_builtin_config(index: usize, out: *mut *mut LivsicConfig) -> LivsicStatus {
    guard(|| {
        if out.is_null() {
            return fail(LivsicStatus::NullPointer, "null output pointer");
        }
        let Some((_, text)) = BUILTIN_CONFIGS.get(index) else {
            return fail(LivsicStatus::OutOfRange, format!("no built-in config {index}"));
        };
        from_result(ExperimentConfig::from_json(text), |c| *out = Box::into_raw(Box::new(LivsicConfig(c))))
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn livsic_config_set_seed(config: *mut LivsicConfig, seed: u64) -> LivsicStatus {
    match config.as_mut() {
        Some(c) => {
            c.0.seed = seed;
            LivsicStatus::Ok
        }
        None => fail(LivsicStatus::NullPointer, "null config"),
    }
}

/// # Safety
/// `config` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn livsic_config_free(config: *mut LivsicConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the scenario described by `config`.
///
/// # Safety
/// `config` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn livsic_run(config: *const LivsicConfig, out: *mut *mut LivsicReport) -> LivsicStatus {
    guard(|| {
        let Some(cfg) = config.as_ref() else {
            return fail(LivsicStatus::NullPointer, "null config");
        };
        if out.is_null() {
            return fail(LivsicStatus::NullPointer, "null output pointer");
        }
        let r = experiments::run(&cfg.0).map_err(|e| match e {
            Error::ConfigInvalid(m) => Error::ConfigInvalid(format!("{} (seed {}): {m}", cfg.0.scenario.as_str(), cfg.0.seed)),
            other => other,
        });
        from_result(r, |r| *out = Box::into_raw(Box::new(LivsicReport(r))))
    })
}

/// 1 if every verdict passed, 0 otherwise (including a null report).
///
/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn livsic_report_passed(report: *const LivsicReport) -> i32 {
    report.as_ref().is_some_and(|r| r.0.passed) as i32
}

/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn livsic_report_verdict_count(report: *const LivsicReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.verdicts.len())
}

/// The report as pretty JSON; release with [`livsic_string_free`].
///
/// # Safety
/// `report` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn livsic_report_to_json(report: *const LivsicReport, out: *mut *mut c_char) -> LivsicStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(LivsicStatus::NullPointer, "null report");
        };
        if out.is_null() {
            return fail(LivsicStatus::NullPointer, "null output pointer");
        }
        match CString::new(r.0.to_json()) {
            Ok(s) => {
                *out = s.into_raw();
                LivsicStatus::Ok
            }
            Err(_) => fail(LivsicStatus::Io, "report contains a NUL byte"),
        }
    })
}

/// Writes the report to `path`: a JSON file, or a directory of CSV tables.
///
/// # Safety
/// `report` must come from this library; `path` must be a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn livsic_report_write(report: *const LivsicReport, format: LivsicFormat, path: *const c_char) -> LivsicStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(LivsicStatus::NullPointer, "null report");
        };
        let path = match str_arg(path) {
            Ok(p) => Path::new(p),
            Err(s) => return s,
        };
        let format = match format {
            LivsicFormat::Json => Format::Json,
            LivsicFormat::Csv => Format::Csv,
        };
        from_result(emit(std::slice::from_ref(&r.0), format, Some(path)), |_| ())
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn livsic_report_free(report: *mut LivsicReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from a function of this library returning an owned string.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn livsic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
