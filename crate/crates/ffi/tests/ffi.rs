use std::ffi::{c_char, CStr, CString};
use std::ptr;

use tmsl_ffi::*;

fn detect_a(variant: u32) -> *mut TmslMachine {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tmsl_machine_detect_a(variant, &mut m) }, TmslStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { tmsl_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tmsl_last_error_message()) }.to_str().unwrap().to_owned()
}

#[test]
fn both_runners_accept_ba() {
    let input = CString::new("BA").unwrap();
    let accept = CString::new("accept").unwrap();
    for variant in [0, 1] {
        let m = detect_a(variant);
        let mut acc = u32::MAX;
        assert_eq!(unsafe { tmsl_machine_state_index(m, accept.as_ptr(), &mut acc) }, TmslStatus::Ok);
        let (mut direct, mut utm) = (u32::MAX, u32::MAX);
        assert_eq!(unsafe { tmsl_tm_run(m, input.as_ptr(), 2, &mut direct) }, TmslStatus::Ok);
        assert_eq!(unsafe { tmsl_utm_run_cycles(m, input.as_ptr(), 2, &mut utm) }, TmslStatus::Ok);
        assert_eq!((direct, utm), (acc, acc));
        assert_eq!(last_error(), "");
        unsafe { tmsl_machine_free(m) };
    }
}

#[test]
fn json_round_trip() {
    let m = detect_a(1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tmsl_machine_to_json(m, &mut s) }, TmslStatus::Ok);
    let json = take(s);
    let c = CString::new(json.clone()).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { tmsl_machine_from_json(c.as_ptr(), &mut back) }, TmslStatus::Ok);
    let mut s2 = ptr::null_mut();
    assert_eq!(unsafe { tmsl_machine_to_json(back, &mut s2) }, TmslStatus::Ok);
    assert_eq!(take(s2), json);
    unsafe {
        tmsl_machine_free(back);
        tmsl_machine_free(m);
    }
}

#[test]
fn geometry_and_table() {
    let m = detect_a(0);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tmsl_geometry_report_json(m, ptr::null(), 1, &mut s) }, TmslStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(v["rank"], 4);
    assert_eq!(v["nonzero_block"], serde_json::json!([3, 13, 18, 23, 24, 25]));

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tmsl_weight_one_table_csv(m, ptr::null(), 24, &mut s) }, TmslStatus::Ok);
    let csv = take(s);
    assert!(csv.lines().any(|l| l == "BA,accept,accept,ERROR:reject,accept,ERROR:reject,accept,2"), "{csv}");
    unsafe { tmsl_machine_free(m) };
}

#[test]
fn error_statuses() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tmsl_machine_detect_a(2, &mut m) }, TmslStatus::InvalidInput);
    assert!(last_error().contains("variant 2"));
    assert_eq!(unsafe { tmsl_machine_detect_a(0, ptr::null_mut()) }, TmslStatus::NullPointer);
    assert_eq!(unsafe { tmsl_machine_from_json(ptr::null(), &mut m) }, TmslStatus::NullPointer);
    let bad = CString::new("{ not json").unwrap();
    assert_eq!(unsafe { tmsl_machine_from_json(bad.as_ptr(), &mut m) }, TmslStatus::InvalidInput);
    assert!(!last_error().is_empty());

    let m = detect_a(0);
    let mut out = 0u32;
    let invalid = [0xffu8, 0];
    let status = unsafe { tmsl_tm_run(m, invalid.as_ptr() as *const c_char, 2, &mut out) };
    assert_eq!(status, TmslStatus::InvalidUtf8);
    let unknown = CString::new("AC").unwrap();
    assert_eq!(unsafe { tmsl_tm_run(m, unknown.as_ptr(), 2, &mut out) }, TmslStatus::InvalidInput);

    let mut s = ptr::null_mut();
    for k in [0, 31] {
        assert_eq!(unsafe { tmsl_weight_one_table_csv(m, ptr::null(), k, &mut s) }, TmslStatus::InvalidInput);
    }
    assert_eq!(unsafe { tmsl_geometry_report_json(m, ptr::null(), 0, &mut s) }, TmslStatus::Budget);
    assert!(s.is_null());
    unsafe {
        tmsl_string_free(ptr::null_mut());
        tmsl_machine_free(ptr::null_mut());
        tmsl_machine_free(m);
    }
}

const SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "tmsl.h"

int main(void) {
    TmslMachine *m = NULL;
    if (tmsl_machine_detect_a(0, &m) != TMSL_STATUS_OK) return 1;
    uint32_t acc, y;
    if (tmsl_machine_state_index(m, "accept", &acc) != TMSL_STATUS_OK) return 2;
    if (tmsl_utm_run_cycles(m, "BA", 2, &y) != TMSL_STATUS_OK || y != acc) return 3;
    if (tmsl_machine_detect_a(7, &m) != TMSL_STATUS_INVALID_INPUT) return 4;
    if (strlen(tmsl_last_error_message()) == 0) return 5;
    tmsl_machine_free(m);
    puts("ok");
    return 0;
}
"#;

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_the_static_library() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libtmsl_ffi.a");
    if std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // Test builds only produce the rlib, so build the static library explicitly.
    let built = std::process::Command::new(env!("CARGO"))
        .args(["build", "--quiet", "--lib", "-p", "tmsl-ffi", "--manifest-path"])
        .arg(manifest.join("Cargo.toml"))
        .args(profile_dir.ends_with("release").then_some("--release"))
        .status()
        .unwrap();
    assert!(built.success() && lib.exists(), "could not build {}", lib.display());
    let dir = std::env::temp_dir().join(format!("tmsl_ffi_smoke_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let exe = dir.join("smoke");
    std::fs::write(&src, SMOKE).unwrap();
    let status = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
    std::fs::remove_dir_all(&dir).ok();
}
