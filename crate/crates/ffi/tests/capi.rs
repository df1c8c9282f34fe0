use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use plocal_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { plocal_string_free(s) };
    out
}

fn last_error() -> String {
    let p = plocal_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut PlocalSpec {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { plocal_spec_builtin(name.as_ptr(), &mut h) }, PlocalStatus::Ok);
    h
}

#[test]
fn saturation_through_handles() {
    let h = builtin("s4-d8");
    assert_eq!(unsafe { plocal_spec_is_finite_group(h) }, 1);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { plocal_check_saturation(h, &mut out) }, PlocalStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["saturated"], true);
    unsafe { plocal_spec_free(h) };
}

#[test]
fn stable_elements_of_s4() {
    let h = builtin("s4-d8");
    let coeff = CString::new("Z/2").unwrap();
    for (n, dim) in [(0, 1), (1, 1), (2, 2)] {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { plocal_stable_elements(h, n, coeff.as_ptr(), &mut out) }, PlocalStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["dimension"], dim, "degree {n}");
    }
    unsafe { plocal_spec_free(h) };
}

#[test]
fn parse_round_trip_and_errors() {
    let h = builtin("dihedral-so3");
    assert_eq!(unsafe { plocal_spec_is_finite_group(h) }, 0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { plocal_spec_to_json(h, &mut json) }, PlocalStatus::Ok);
    let text = CString::new(take(json)).unwrap();
    let mut h2 = ptr::null_mut();
    assert_eq!(unsafe { plocal_spec_parse(text.as_ptr(), &mut h2) }, PlocalStatus::Ok);
    unsafe {
        plocal_spec_free(h);
        plocal_spec_free(h2);
    }

    let bad = CString::new("{\"p\": 4, \"group\": {\"permutations\": [[0]]}}").unwrap();
    let mut h3 = ptr::null_mut();
    let st = unsafe { plocal_spec_parse(bad.as_ptr(), &mut h3) };
    assert_eq!(st, PlocalStatus::InvalidInput);
    assert!(h3.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { plocal_spec_parse(ptr::null(), &mut h3) }, PlocalStatus::NullPointer);
    let missing = CString::new("no-such-example").unwrap();
    assert_eq!(unsafe { plocal_spec_builtin(missing.as_ptr(), &mut h3) }, PlocalStatus::InvalidInput);
    assert!(last_error().contains("no-such-example"));
    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { plocal_spec_parse(invalid.as_ptr().cast(), &mut h3) }, PlocalStatus::InvalidUtf8);
    unsafe { plocal_spec_free(ptr::null_mut()) };
    unsafe { plocal_string_free(ptr::null_mut()) };
}

#[test]
fn generic_commands_map_exit_codes() {
    let h = builtin("s4-d8");
    let args: Vec<CString> = ["quotient", "--subgroup", "Z"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let argv: Vec<*const c_char> = args.iter().map(|s| s.as_ptr()).collect();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { plocal_spec_run(h, argv.as_ptr(), argv.len(), &mut out) }, PlocalStatus::Negative);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["normal"], false);

    let args: Vec<CString> = ["bullet"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let argv: Vec<*const c_char> = args.iter().map(|s| s.as_ptr()).collect();
    assert_eq!(unsafe { plocal_spec_run(h, argv.as_ptr(), argv.len(), &mut out) }, PlocalStatus::InvalidInput);
    assert!(out.is_null());
    assert!(last_error().contains("p-toral"));
    assert_eq!(unsafe { plocal_spec_run(h, ptr::null(), 0, &mut out) }, PlocalStatus::InvalidInput);
    unsafe { plocal_spec_free(h) };

    let h = builtin("trivial-torus");
    let coeff = CString::new("Z/3").unwrap();
    assert_eq!(unsafe { plocal_stable_elements(h, 1, coeff.as_ptr(), &mut out) }, PlocalStatus::CapExceeded);
    unsafe { plocal_spec_free(h) };
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(crate_dir().join("include/plocal.h")).unwrap();
    for name in [
        "typedef struct PlocalSpec PlocalSpec;",
        "PLOCAL_STATUS_CAP_EXCEEDED = 3",
        "plocal_spec_parse(",
        "plocal_spec_run(",
        "plocal_string_free(",
        "plocal_last_error(",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

fn staticlib() -> Option<PathBuf> {
    // target/<profile>/deps/capi-... -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libplocal_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = staticlib().expect("libplocal_ffi.a next to the test binary");
    let tmp = std::env::temp_dir().join(format!("plocal-capi-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "plocal.h"

int main(void) {
    PlocalSpec *spec = NULL;
    if (plocal_spec_builtin("a4-v4", &spec) != PLOCAL_STATUS_OK) return 10;
    char *report = NULL;
    if (plocal_check_saturation(spec, &report) != PLOCAL_STATUS_OK) return 11;
    int ok = strstr(report, "\"saturated\": true") != NULL;
    plocal_string_free(report);
    plocal_spec_free(spec);
    if (plocal_spec_parse("{", &spec) != PLOCAL_STATUS_INVALID_INPUT) return 12;
    if (plocal_last_error() == NULL) return 13;
    printf("%s\n", plocal_version());
    return ok ? 0 : 14;
}
"#,
    )
    .unwrap();
    let bin = tmp.join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
    let _ = std::fs::remove_dir_all(Path::new(&tmp));
}
