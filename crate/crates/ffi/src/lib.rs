//! C ABI for plocal.
//!
//! Specs are held behind an opaque [`PlocalSpec`] handle. Every call returns a
//! [`PlocalStatus`]; reports come back as JSON strings owned by the library and released
//! with [`plocal_string_free`]. After a non-`OK` status, [`plocal_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plocal::catalog;
use plocal::cli::run_with;
use plocal::spec::SpecDocument;
use plocal::Error;

/// Status codes. 0 to 3 mirror the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlocalStatus {
    Ok = 0,
    /// The computation finished with a negative verdict (e.g. not saturated).
    Negative = 1,
    /// Malformed spec, arguments or preconditions.
    InvalidInput = 2,
    CapExceeded = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// A parsed and validated spec document.
pub struct PlocalSpec {
    doc: SpecDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(code: i32) -> PlocalStatus {
    match code {
        0 => PlocalStatus::Ok,
        1 => PlocalStatus::Negative,
        3 => PlocalStatus::CapExceeded,
        _ => PlocalStatus::InvalidInput,
    }
}

fn fail(e: &Error) -> PlocalStatus {
    set_error(e.to_string());
    status_of(e.exit_code())
}

fn guard(f: impl FnOnce() -> PlocalStatus) -> PlocalStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            PlocalStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PlocalStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(PlocalStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        PlocalStatus::InvalidUtf8
    })
}

fn give_string(s: String, out: *mut *mut c_char) {
    let c = CString::new(s.replace('\0', " ")).expect("no interior nul");
    unsafe { *out = c.into_raw() };
}

fn give_spec(doc: SpecDocument, out: *mut *mut PlocalSpec) -> PlocalStatus {
    unsafe { *out = Box::into_raw(Box::new(PlocalSpec { doc })) };
    PlocalStatus::Ok
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn plocal_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last non-`OK` status on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn plocal_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON spec document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_parse(json: *const c_char, out: *mut *mut PlocalSpec) -> PlocalStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return PlocalStatus::NullPointer;
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SpecDocument::parse(text) {
            Ok(doc) => give_spec(doc, out),
            Err(e) => fail(&e),
        }
    })
}

/// Loads a built-in example by name.
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_builtin(name: *const c_char, out: *mut *mut PlocalSpec) -> PlocalStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return PlocalStatus::NullPointer;
        }
        let name = match str_arg(name, "name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match catalog::load(name) {
            Ok(doc) => give_spec(doc, out),
            Err(e) => fail(&e),
        }
    })
}

/// Releases a spec handle. Null is ignored.
///
/// # Safety
/// `spec` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_free(spec: *mut PlocalSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Serializes the spec back to JSON.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_to_json(spec: *const PlocalSpec, out: *mut *mut c_char) -> PlocalStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            set_error("null argument");
            return PlocalStatus::NullPointer;
        }
        give_string((*spec).doc.to_json(), out);
        PlocalStatus::Ok
    })
}

/// Whether the spec is a finite group (1) or a p-toral ambient (0); -1 on null.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_is_finite_group(spec: *const PlocalSpec) -> i32 {
    if spec.is_null() {
        return -1;
    }
    (*spec).doc.is_finite_group() as i32
}

/// Runs a command-line subcommand against the spec and returns its JSON report.
/// `argv` holds the subcommand and its flags without the program name or spec argument,
/// e.g. `{"stable", "--degree", "2"}`. On `OK` and `NEGATIVE` the report is written to
/// `out`; otherwise `out` is set to null.
///
/// # Safety
/// `spec` must be a live handle, `argv` must point to `argc` nul-terminated strings and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plocal_spec_run(
    spec: *const PlocalSpec,
    argv: *const *const c_char,
    argc: usize,
    out: *mut *mut c_char,
) -> PlocalStatus {
    guard(|| {
        if spec.is_null() || out.is_null() || (argv.is_null() && argc > 0) {
            set_error("null argument");
            return PlocalStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let mut args = Vec::with_capacity(argc);
        for i in 0..argc {
            match str_arg(*argv.add(i), "argv entry") {
                Ok(a) => args.push(a.to_string()),
                Err(s) => return s,
            }
        }
        run_args(&(*spec).doc, args, out)
    })
}

fn run_args(doc: &SpecDocument, args: Vec<String>, out: *mut *mut c_char) -> PlocalStatus {
    if args.is_empty() {
        set_error("no subcommand");
        return PlocalStatus::InvalidInput;
    }
    let label = doc.name.clone().unwrap_or_else(|| "spec".into());
    let mut full = vec!["plocal".to_string(), args[0].clone(), label];
    full.extend(args[1..].iter().cloned());
    full.extend(["--output".to_string(), "json".to_string()]);
    let o = run_with(full, Some(doc));
    let status = status_of(o.code);
    match status {
        PlocalStatus::Ok | PlocalStatus::Negative => give_string(o.stdout, out),
        _ => {
            let msg = serde_error(&o.stderr);
            set_error(msg);
        }
    }
    status
}

fn serde_error(stderr: &str) -> String {
    let v: Option<serde_json::Value> = serde_json::from_str(stderr).ok();
    v.and_then(|v| v["error"].as_str().map(str::to_string)).unwrap_or_else(|| stderr.trim().to_string())
}

/// Saturation check; `NEGATIVE` when the fusion system is not saturated.
///
/// # Safety
/// As for [`plocal_spec_run`].
#[no_mangle]
pub unsafe extern "C" fn plocal_check_saturation(spec: *const PlocalSpec, out: *mut *mut c_char) -> PlocalStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            set_error("null argument");
            return PlocalStatus::NullPointer;
        }
        *out = ptr::null_mut();
        run_args(&(*spec).doc, vec!["check-saturation".into()], out)
    })
}

/// Stable elements in degree `degree` with coefficients such as `"Z/2"`.
///
/// # Safety
/// As for [`plocal_spec_run`]; `coeff` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn plocal_stable_elements(
    spec: *const PlocalSpec,
    degree: u32,
    coeff: *const c_char,
    out: *mut *mut c_char,
) -> PlocalStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            set_error("null argument");
            return PlocalStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let coeff = match str_arg(coeff, "coeff") {
            Ok(c) => c,
            Err(s) => return s,
        };
        let args = vec!["stable".into(), "--degree".into(), degree.to_string(), "--coeff".into(), coeff.to_string()];
        run_args(&(*spec).doc, args, out)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plocal_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
