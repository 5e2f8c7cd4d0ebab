//! C ABI over the cat0 engine.
//!
//! Conventions:
//!
//! * Every fallible call returns a [`Cat0Status`]; results come back through out-pointers.
//! * Handles ([`Cat0Scenario`], [`Cat0Space`]) are opaque and owned by the caller once
//!   created; release them with the matching `*_free` function.
//! * Strings crossing the boundary are NUL-terminated UTF-8. Strings returned by the
//!   library are released with [`cat0_string_free`].
//! * Points, boundary points and reports are JSON, in the same literal grammar as the
//!   scenario files.
//! * After a failing call, [`cat0_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cat0_core::boundary::{busemann, tits_angle};
use cat0_core::cli::{execute, parse_command_name, Status};
use cat0_core::document::{parse_boundary, parse_document, parse_point, parse_space, Overrides, ScenarioDocument};
use cat0_core::{Error, Space};
use serde_json::Value;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cat0Status {
    Ok = 0,
    /// The command ran but could not certify an answer (for example no unique center).
    Incomplete = 1,
    NullArgument = 2,
    InvalidUtf8 = 3,
    InvalidJson = 4,
    Load = 5,
    Domain = 6,
    Argument = 7,
    Precondition = 8,
    NoUniqueCenter = 9,
    NoConvergence = 10,
    Unsupported = 11,
    UnknownCommand = 12,
    UnknownTable = 13,
    /// A panic was caught at the boundary.
    Panic = 14,
}

/// A parsed scenario document with its queries.
pub struct Cat0Scenario {
    doc: ScenarioDocument,
}

/// A model space for direct geometric queries.
pub struct Cat0Space {
    space: Space,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(Cat0Status, String);

type Outcome<T> = std::result::Result<T, Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Load { .. } => Cat0Status::Load,
            Error::Domain(_) | Error::EmptySet | Error::DegenerateVertex(_) => Cat0Status::Domain,
            Error::Argument(_) | Error::Composition(_) => Cat0Status::Argument,
            Error::Precondition(_) => Cat0Status::Precondition,
            Error::NoUniqueCenter { .. } => Cat0Status::NoUniqueCenter,
            Error::NoConvergence { .. } => Cat0Status::NoConvergence,
            Error::Unsupported(_) => Cat0Status::Unsupported,
        };
        Failure(code, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f` behind the panic boundary and records any failure for `cat0_last_error`.
fn guard(f: impl FnOnce() -> Outcome<Cat0Status>) -> Cat0Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            status
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            Cat0Status::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure(Cat0Status::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(Cat0Status::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn json(p: *const c_char, what: &str) -> Outcome<Value> {
    serde_json::from_str(text(p, what)?).map_err(|e| Failure(Cat0Status::InvalidJson, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref().ok_or_else(|| Failure(Cat0Status::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T) -> Outcome<()> {
    if p.is_null() {
        Err(Failure(Cat0Status::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// Message for the last failing call on this thread, or null. The pointer stays valid
/// until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cat0_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cat0_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cat0_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scenario document.
///
/// # Safety
/// `document` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_parse(document: *const c_char, out: *mut *mut Cat0Scenario) -> Cat0Status {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let doc = parse_document(text(document, "document")?, &Overrides::default())?;
        *out = Box::into_raw(Box::new(Cat0Scenario { doc }));
        Ok(Cat0Status::Ok)
    })
}

/// # Safety
/// `scenario` must come from `cat0_scenario_parse` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_free(scenario: *mut Cat0Scenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of ids in omega, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_len(scenario: *const Cat0Scenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.doc.scenario.len())
}

/// Number of classes of the generated equivalence relation, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_class_count(scenario: *const Cat0Scenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.doc.scenario.classes().len())
}

/// Overrides one tolerance by key, with the same keys and value syntax as the scenario file.
///
/// # Safety
/// `scenario` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_set_tolerance(
    scenario: *mut Cat0Scenario,
    key: *const c_char,
    value: *const c_char,
) -> Cat0Status {
    guard(|| {
        let s = scenario
            .as_mut()
            .ok_or_else(|| Failure(Cat0Status::NullArgument, "scenario is null".into()))?;
        s.doc.scenario.tolerances.set(text(key, "key")?, text(value, "value")?)?;
        Ok(Cat0Status::Ok)
    })
}

/// Overrides the scenario seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cat0_scenario_set_seed(scenario: *mut Cat0Scenario, seed: u64) -> Cat0Status {
    guard(|| {
        let s = scenario
            .as_mut()
            .ok_or_else(|| Failure(Cat0Status::NullArgument, "scenario is null".into()))?;
        s.doc.scenario.seed = seed;
        Ok(Cat0Status::Ok)
    })
}

/// Runs a command (`"dichotomy"`, `"tits"`, ...) and returns its JSON report through
/// `report_json`. Returns `Incomplete` when the report is valid but uncertified.
///
/// # Safety
/// `scenario` must be a live handle, `command` a NUL-terminated string, `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_run(
    scenario: *const Cat0Scenario,
    command: *const c_char,
    report_json: *mut *mut c_char,
) -> Cat0Status {
    guard(|| {
        out_ptr(report_json)?;
        *report_json = ptr::null_mut();
        let s = handle(scenario, "scenario")?;
        let report = execute(command_kind(command)?, &s.doc)?;
        *report_json = owned_string(report.to_json());
        Ok(status_of(report.status))
    })
}

/// Runs a command and returns one of its tables as CSV.
///
/// # Safety
/// As for `cat0_run`; `table` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cat0_run_table(
    scenario: *const Cat0Scenario,
    command: *const c_char,
    table: *const c_char,
    csv: *mut *mut c_char,
) -> Cat0Status {
    guard(|| {
        out_ptr(csv)?;
        *csv = ptr::null_mut();
        let s = handle(scenario, "scenario")?;
        let name = text(table, "table")?;
        let report = execute(command_kind(command)?, &s.doc)?;
        let t = report
            .tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Failure(Cat0Status::UnknownTable, format!("no table {name:?}")))?;
        *csv = owned_string(t.to_csv()?);
        Ok(status_of(report.status))
    })
}

unsafe fn command_kind(command: *const c_char) -> Outcome<cat0_core::cli::CommandKind> {
    let name = text(command, "command")?;
    parse_command_name(name).ok_or_else(|| Failure(Cat0Status::UnknownCommand, format!("unknown command {name:?}")))
}

fn status_of(s: Status) -> Cat0Status {
    match s {
        Status::Ok => Cat0Status::Ok,
        Status::Incomplete => Cat0Status::Incomplete,
    }
}

/// Parses a space literal such as `{"euclidean": 2}` or `{"tree": "tripod"}`.
///
/// # Safety
/// `literal` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_parse(literal: *const c_char, out: *mut *mut Cat0Space) -> Cat0Status {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let space = parse_space(&json(literal, "space")?, "space")?;
        *out = Box::into_raw(Box::new(Cat0Space { space }));
        Ok(Cat0Status::Ok)
    })
}

/// # Safety
/// `space` must come from `cat0_space_parse` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_free(space: *mut Cat0Space) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Distance between two point literals.
///
/// # Safety
/// `space` must be a live handle, `p` and `q` NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_distance(
    space: *const Cat0Space,
    p: *const c_char,
    q: *const c_char,
    out: *mut f64,
) -> Cat0Status {
    guard(|| {
        out_ptr(out)?;
        let s = &handle(space, "space")?.space;
        let p = parse_point(s, &json(p, "p")?, "p")?;
        let q = parse_point(s, &json(q, "q")?, "q")?;
        *out = s.distance(&p, &q)?;
        Ok(Cat0Status::Ok)
    })
}

/// Busemann function b_{x0, xi}(x).
///
/// # Safety
/// `space` must be a live handle, the literals NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_busemann(
    space: *const Cat0Space,
    x0: *const c_char,
    xi: *const c_char,
    x: *const c_char,
    out: *mut f64,
) -> Cat0Status {
    guard(|| {
        out_ptr(out)?;
        let s = &handle(space, "space")?.space;
        let x0 = parse_point(s, &json(x0, "x0")?, "x0")?;
        let xi = parse_boundary(s, &json(xi, "xi")?, "xi")?;
        let x = parse_point(s, &json(x, "x")?, "x")?;
        *out = busemann(s, &x0, &xi, &x)?;
        Ok(Cat0Status::Ok)
    })
}

/// Tits angle between two boundary literals.
///
/// # Safety
/// `space` must be a live handle, the literals NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_tits_angle(
    space: *const Cat0Space,
    xi: *const c_char,
    eta: *const c_char,
    out: *mut f64,
) -> Cat0Status {
    guard(|| {
        out_ptr(out)?;
        let s = &handle(space, "space")?.space;
        let xi = parse_boundary(s, &json(xi, "xi")?, "xi")?;
        let eta = parse_boundary(s, &json(eta, "eta")?, "eta")?;
        *out = tits_angle(s, &xi, &eta)?;
        Ok(Cat0Status::Ok)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_errors_map_to_codes() {
        let f: Failure = Error::NoUniqueCenter { radius: 3.0 }.into();
        assert_eq!(f.0, Cat0Status::NoUniqueCenter);
        let f: Failure = Error::Load { context: "omega".into(), reason: "x".into() }.into();
        assert_eq!(f.0, Cat0Status::Load);
        assert!(f.1.contains("omega"));
    }

    #[test]
    fn panics_stop_at_the_boundary() {
        let code = guard(|| panic!("boom"));
        assert_eq!(code, Cat0Status::Panic);
        let msg = unsafe { CStr::from_ptr(cat0_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }
}
