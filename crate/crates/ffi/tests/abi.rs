use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cat0_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn bundled(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples").join(name);
    c(&std::fs::read_to_string(p).unwrap())
}

fn last_error() -> String {
    let p = cat0_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    cat0_string_free(s);
    out
}

unsafe fn scenario(name: &str) -> *mut Cat0Scenario {
    let mut h = ptr::null_mut();
    assert_eq!(cat0_scenario_parse(bundled(name).as_ptr(), &mut h), Cat0Status::Ok);
    h
}

#[test]
fn dichotomy_round_trip() {
    unsafe {
        let h = scenario("screw.json");
        assert_eq!(cat0_scenario_len(h), 4);
        assert_eq!(cat0_scenario_class_count(h), 1);
        let mut out = ptr::null_mut();
        assert_eq!(cat0_run(h, c("dichotomy").as_ptr(), &mut out), Cat0Status::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(report["status"], "ok");
        assert!(report.to_string().contains("invariant_flat"));
        cat0_scenario_free(h);
    }
}

#[test]
fn incomplete_and_tables() {
    unsafe {
        let h = scenario("tripod_ends.json");
        let mut out = ptr::null_mut();
        assert_eq!(cat0_run(h, c("angular-circumcenter").as_ptr(), &mut out), Cat0Status::Incomplete);
        assert!(take(out).contains("incomplete"));
        let mut csv = ptr::null_mut();
        assert_eq!(cat0_run_table(h, c("tits").as_ptr(), c("angle_trace").as_ptr(), &mut csv), Cat0Status::Ok);
        assert!(take(csv).starts_with("query,n,angle\n"));
        let mut csv = ptr::null_mut();
        assert_eq!(cat0_run_table(h, c("tits").as_ptr(), c("nope").as_ptr(), &mut csv), Cat0Status::UnknownTable);
        assert!(csv.is_null());
        cat0_scenario_free(h);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cat0_scenario_parse(ptr::null(), &mut h), Cat0Status::NullArgument);
        assert!(h.is_null());
        assert_eq!(cat0_scenario_parse(c("{\"version\": 2}").as_ptr(), &mut h), Cat0Status::Load);
        assert!(last_error().contains("version"));

        let h = scenario("translation.json");
        let mut out = ptr::null_mut();
        assert_eq!(cat0_run(h, c("explode").as_ptr(), &mut out), Cat0Status::UnknownCommand);
        assert!(last_error().contains("explode"));
        assert_eq!(cat0_run(ptr::null(), c("tits").as_ptr(), &mut out), Cat0Status::NullArgument);
        assert_eq!(cat0_scenario_set_tolerance(h, c("bogus").as_ptr(), c("1").as_ptr()), Cat0Status::Argument);
        assert_eq!(cat0_scenario_set_tolerance(h, c("angular").as_ptr(), c("1e-5").as_ptr()), Cat0Status::Ok);
        assert!(cat0_last_error().is_null());
        assert_eq!(cat0_scenario_set_seed(h, 5), Cat0Status::Ok);
        assert_eq!(cat0_run(h, c("dichotomy").as_ptr(), &mut out), Cat0Status::Ok);
        assert!(take(out).contains("\"seed\": 5"));
        cat0_scenario_free(h);
        cat0_scenario_free(ptr::null_mut());
        cat0_string_free(ptr::null_mut());
    }
}

#[test]
fn direct_geometry() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(cat0_space_parse(c("{\"tree\": \"tripod\"}").as_ptr(), &mut s), Cat0Status::Ok);
        let mut d = 0.0;
        assert_eq!(cat0_space_distance(s, c("\"a@1\"").as_ptr(), c("\"b@2\"").as_ptr(), &mut d), Cat0Status::Ok);
        assert_eq!(d, 3.0);
        let mut b = 0.0;
        assert_eq!(
            cat0_space_busemann(s, c("\"o\"").as_ptr(), c("\"a\"").as_ptr(), c("\"b@1\"").as_ptr(), &mut b),
            Cat0Status::Ok
        );
        assert_eq!(b, 1.0);
        assert_eq!(cat0_space_distance(s, c("\"z@1\"").as_ptr(), c("\"o\"").as_ptr(), &mut d), Cat0Status::Load);
        assert_eq!(cat0_space_distance(s, c("[1,").as_ptr(), c("\"o\"").as_ptr(), &mut d), Cat0Status::InvalidJson);
        cat0_space_free(s);

        let mut e = ptr::null_mut();
        assert_eq!(cat0_space_parse(c("{\"euclidean\": 2}").as_ptr(), &mut e), Cat0Status::Ok);
        let mut a = 0.0;
        assert_eq!(cat0_space_tits_angle(e, c("[1, 0]").as_ptr(), c("[0, 3]").as_ptr(), &mut a), Cat0Status::Ok);
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        cat0_space_free(e);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(cat0_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_abi() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/cat0.h");
    let header = std::fs::read_to_string(&path).unwrap();
    for f in [
        "cat0_last_error",
        "cat0_version",
        "cat0_string_free",
        "cat0_scenario_parse",
        "cat0_scenario_free",
        "cat0_scenario_set_tolerance",
        "cat0_run",
        "cat0_run_table",
        "cat0_space_parse",
        "cat0_space_distance",
        "cat0_space_busemann",
        "cat0_space_tits_angle",
        "typedef struct Cat0Scenario Cat0Scenario",
        "CAT0_STATUS_NO_UNIQUE_CENTER = 9",
    ] {
        assert!(header.contains(f), "missing {f}");
    }
    // Syntax check with whatever C compiler is around.
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        if let Ok(out) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&path).output() {
            assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
}
