use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use funstack_ffi::*;

fn parse(src: &str) -> (FunStatus, *mut FunProgram) {
    let c = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    let st = unsafe { fun_program_parse(c.as_ptr(), &mut p) };
    (st, p)
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { fun_string_free(s) };
    out
}

fn last_error() -> String {
    let m = fun_last_error_message();
    assert!(!m.is_null());
    unsafe { CStr::from_ptr(m) }.to_str().unwrap().to_owned()
}

#[test]
fn infer_returns_json_posterior() {
    let (st, p) = parse("let a = random (Bernoulli(0.5)) in let b = random (Bernoulli(0.5)) in observe (a || b); a");
    assert_eq!(st, FunStatus::Ok);
    assert_eq!(unsafe { fun_program_is_discrete(p) }, 1);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fun_infer(p, ptr::null(), &mut out) }, FunStatus::Ok);
    let j: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(j["backend"], "enum");
    assert!((j["evidence"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    let pt = j["posterior"].as_array().unwrap().iter().find(|e| e["value"] == true).unwrap();
    assert!((pt["probability"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    unsafe { fun_program_free(p) };
}

#[test]
fn every_exact_backend_is_reachable() {
    let (_, p) = parse("let a = random (Bernoulli(0.3)) in observe a; a");
    for b in [FunBackend::Enum, FunBackend::Mt, FunBackend::Imp, FunBackend::Fg] {
        let mut o = fun_infer_options_default();
        o.backend = b;
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { fun_infer(p, &o, &mut out) }, FunStatus::Ok, "{b:?}");
        let j: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert!((j["evidence"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    }
    unsafe { fun_program_free(p) };
}

#[test]
fn errors_map_to_status_codes() {
    let (st, p) = parse("let x = in");
    assert_eq!(st, FunStatus::UserError);
    assert!(p.is_null());
    assert!(last_error().starts_with("ParseError"));

    let (st, _) = parse("1 + true");
    assert_eq!(st, FunStatus::UserError);
    assert!(last_error().starts_with("TypeError"));

    let (st, p) = parse("let x = random (Gaussian(0.0, 1.0)) in x");
    assert_eq!(st, FunStatus::Ok);
    assert_eq!(unsafe { fun_program_is_discrete(p) }, 0);
    let mut o = fun_infer_options_default();
    o.backend = FunBackend::Fg;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fun_infer(p, &o, &mut out) }, FunStatus::Unsupported);
    assert!(out.is_null());
    assert!(last_error().starts_with("ContinuousGraphError"));
    unsafe { fun_program_free(p) };

    let (_, p) = parse("observe false; 1");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fun_infer(p, ptr::null(), &mut out) }, FunStatus::UserError);
    assert!(last_error().starts_with("ZeroEvidence"));
    unsafe { fun_program_free(p) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fun_program_parse(ptr::null(), &mut p) }, FunStatus::NullArgument);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fun_infer(ptr::null(), ptr::null(), &mut out) }, FunStatus::NullArgument);
    assert_eq!(unsafe { fun_program_is_discrete(ptr::null()) }, -1);
    unsafe {
        fun_program_free(ptr::null_mut());
        fun_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_reported() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { fun_program_parse(bytes.as_ptr().cast(), &mut p) }, FunStatus::InvalidUtf8);
}

#[test]
fn success_clears_the_last_error() {
    let _ = parse("(");
    assert!(!fun_last_error_message().is_null());
    let (st, p) = parse("1");
    assert_eq!(st, FunStatus::Ok);
    assert!(fun_last_error_message().is_null());
    unsafe { fun_program_free(p) };
}

#[test]
fn compile_and_graph_text() {
    let (_, p) = parse("let a = random (Bernoulli(0.5)) in if a then 1 else 2");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fun_compile_imp(p, &mut out) }, FunStatus::Ok);
    assert!(take(out).contains("Bernoulli"));
    assert_eq!(unsafe { fun_graph_dot(p, &mut out) }, FunStatus::Ok);
    let dot = take(out);
    assert!(dot.starts_with("graph"));
    assert!(dot.contains("cluster_"));
    unsafe { fun_program_free(p) };
}

fn ffi_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

// target/<profile>/deps/abi-<hash> → target/<profile>
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

const C_CLIENT: &str = r#"
#include <stdio.h>
#include <string.h>
#include "funstack.h"

int main(void) {
    FunProgram *p = NULL;
    if (fun_program_parse("let a = random (Bernoulli(0.25)) in observe a; a", &p) != FunStatus_Ok) return 10;
    FunInferOptions o = fun_infer_options_default();
    o.backend = FunBackend_Imp;
    char *json = NULL;
    if (fun_infer(p, &o, &json) != FunStatus_Ok) return 11;
    if (strstr(json, "\"evidence\":0.25") == NULL) { fputs(json, stderr); return 12; }
    fun_string_free(json);
    fun_program_free(p);
    if (fun_program_parse("true + 1", &p) != FunStatus_UserError) return 13;
    if (strncmp(fun_last_error_message(), "TypeError", 9) != 0) return 14;
    puts("ok");
    return 0;
}
"#;

#[test]
fn header_is_valid_c() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let header = ffi_dir().join("include/funstack.h");
    assert!(header.exists(), "build.rs writes the header");
    let st = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn c_client_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let lib = profile_dir();
    if !lib.join("libfunstack_ffi.so").exists() {
        eprintln!("no shared library next to the test binary; skipping");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    std::fs::write(&src, C_CLIENT).unwrap();
    let bin = tmp.path().join("client");
    let st = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg("-I")
        .arg(ffi_dir().join("include"))
        .arg(&src)
        .arg("-o")
        .arg(&bin)
        .arg("-L")
        .arg(&lib)
        .arg("-lfunstack_ffi")
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
