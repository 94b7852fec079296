//! C ABI over the scenario runner.
//!
//! Every function returns a [`UlabStatus`] or writes through out-pointers.
//! On a status other than `Ok` or `CheckFailed`, a message is available from
//! [`ulab_last_error_message`] on the calling thread. Handles and strings
//! returned here are owned by the caller and released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ulab::lab::{self, Report, Scenario, Validated};
use ulab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UlabStatus {
    Ok = 0,
    /// The run completed and at least one check failed.
    CheckFailed = 1,
    /// The scenario or a parameter was rejected.
    Validation = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    IndexOutOfRange = 5,
    Internal = 6,
    Panic = 7,
}

/// One check of a report. `certificate_status` is 0 for none, 1 exact,
/// 2 proof, 3 evidence.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UlabCheck {
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub certificate_status: u8,
}

/// A validated scenario.
pub struct UlabScenario(Validated);

/// A finished report.
pub struct UlabReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> UlabStatus {
    match e {
        Error::Validation(_) => UlabStatus::Validation,
        _ => UlabStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> UlabStatus) -> UlabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| String::from("panic"));
            set_error(format!("panic: {msg}"));
            UlabStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, UlabStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(UlabStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(format!("argument is not UTF-8: {e}"));
        UlabStatus::InvalidUtf8
    })
}

fn fail(e: Error) -> UlabStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn report_status(r: &Report) -> UlabStatus {
    if r.pass {
        UlabStatus::Ok
    } else {
        UlabStatus::CheckFailed
    }
}

fn export_string(s: String, out: *mut *mut c_char) -> UlabStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null first.
            unsafe { *out = c.into_raw() };
            UlabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            UlabStatus::Internal
        }
    }
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ulab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failing call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ulab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a scenario.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_scenario_from_json(json: *const c_char, out: *mut *mut UlabScenario) -> UlabStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return UlabStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_json(text).and_then(|s| s.validate()) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(UlabScenario(v)));
                UlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `scenario` must come from [`ulab_scenario_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ulab_scenario_free(scenario: *mut UlabScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a validated scenario. Returns `CheckFailed` when the report does not
/// pass; the report is produced either way.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_scenario_run(scenario: *const UlabScenario, out: *mut *mut UlabReport) -> UlabStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            set_error("null argument");
            return UlabStatus::NullPointer;
        }
        let report = lab::run_validated(&(&*scenario).0);
        let status = report_status(&report);
        *out = Box::into_raw(Box::new(UlabReport(report)));
        status
    })
}

/// Parses, validates and runs a scenario in one call.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_run_scenario_json(json: *const c_char, out: *mut *mut UlabReport) -> UlabStatus {
    let mut scenario = ptr::null_mut();
    let s = ulab_scenario_from_json(json, &mut scenario);
    if s != UlabStatus::Ok {
        if !out.is_null() {
            *out = ptr::null_mut();
        }
        return s;
    }
    let s = ulab_scenario_run(scenario, out);
    ulab_scenario_free(scenario);
    s
}

/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ulab_report_free(report: *mut UlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_report_pass(report: *const UlabReport, out: *mut bool) -> UlabStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return UlabStatus::NullPointer;
        }
        *out = (&*report).0.pass;
        UlabStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_report_check_count(report: *const UlabReport, out: *mut usize) -> UlabStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return UlabStatus::NullPointer;
        }
        *out = (&*report).0.checks.len();
        UlabStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_report_check(report: *const UlabReport, index: usize, out: *mut UlabCheck) -> UlabStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return UlabStatus::NullPointer;
        }
        let Some(c) = (&*report).0.checks.get(index) else {
            set_error(format!("check index {index} out of range"));
            return UlabStatus::IndexOutOfRange;
        };
        use ulab::ucond::CertificateStatus::*;
        *out = UlabCheck {
            abs_err: c.abs_err,
            tol: c.tol,
            pass: c.pass,
            certificate_status: match c.certificate_status {
                None => 0,
                Some(Exact) => 1,
                Some(Proof) => 2,
                Some(Evidence) => 3,
            },
        };
        UlabStatus::Ok
    })
}

/// Report JSON; release with [`ulab_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_report_to_json(report: *const UlabReport, out: *mut *mut c_char) -> UlabStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return UlabStatus::NullPointer;
        }
        export_string((&*report).0.to_json(), out)
    })
}

/// Fixture and scenario-kind listing as JSON; release with
/// [`ulab_string_free`]. `dir` may be null.
///
/// # Safety
/// `dir` must be null or a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ulab_list_fixtures_json(dir: *const c_char, out: *mut *mut c_char) -> UlabStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return UlabStatus::NullPointer;
        }
        let dir = if dir.is_null() {
            None
        } else {
            match read_str(dir) {
                Ok(d) => Some(std::path::PathBuf::from(d)),
                Err(s) => return s,
            }
        };
        export_string(lab::list_fixtures(dir.as_deref()).to_json(), out)
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ulab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
