//! C ABI for funstack.
//!
//! Programs are opaque handles created by `fun_program_parse` and released
//! with `fun_program_free`. Every call returns a `FunStatus`; results come
//! back as NUL-terminated JSON or text owned by the caller and released
//! with `fun_string_free`. After a failing call, `fun_last_error_message`
//! describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use funstack::cli::{infer, Backend, InferOptions};
use funstack::compiler::compile;
use funstack::factorgraph::{program_graph, to_dot};
use funstack::frontend::{load, Program};
use funstack::Error;

/// Status codes. 1–3 mirror the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunStatus {
    Ok = 0,
    /// Syntax, type, evaluation or zero-evidence error.
    UserError = 1,
    /// The backend cannot handle the program (e.g. continuous draws on an exact backend).
    Unsupported = 2,
    Internal = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunBackend {
    /// Enumeration for discrete programs, Monte Carlo otherwise.
    Auto = 0,
    Enum = 1,
    Mt = 2,
    Imp = 3,
    Fg = 4,
    Mc = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FunInferOptions {
    pub backend: FunBackend,
    pub samples: u64,
    pub seed: u64,
    pub max_support: u64,
    pub max_choices: u32,
}

/// A checked program.
pub struct FunProgram {
    program: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: &Error) -> FunStatus {
    set_error(format!("{}: {e}", e.kind()));
    match e.exit_code() {
        1 => FunStatus::UserError,
        2 => FunStatus::Unsupported,
        _ => FunStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> FunStatus) -> FunStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            set_error(format!("panic: {}", msg.unwrap_or_else(|| "unknown".into())));
            FunStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, FunStatus> {
    if s.is_null() {
        set_error("null argument".into());
        return Err(FunStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("source is not valid UTF-8".into());
        FunStatus::InvalidUtf8
    })
}

unsafe fn hand_out(s: String, out: *mut *mut c_char) -> FunStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            FunStatus::Ok
        }
        Err(_) => {
            set_error("result contains a NUL byte".into());
            FunStatus::Internal
        }
    }
}

/// Parse and type-check `source`. On success `*out` owns a new program.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fun_program_parse(source: *const c_char, out: *mut *mut FunProgram) -> FunStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return FunStatus::NullArgument;
        }
        *out = ptr::null_mut();
        let src = match text(source) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match load(src) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(FunProgram { program }));
                FunStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a program. Null is ignored.
///
/// # Safety
/// `p` must come from `fun_program_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fun_program_free(p: *mut FunProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// 1 if the program has no continuous draws or real observations, else 0; -1 for null.
///
/// # Safety
/// `p` must be null or a live program.
#[no_mangle]
pub unsafe extern "C" fn fun_program_is_discrete(p: *const FunProgram) -> i32 {
    match p.as_ref() {
        Some(p) => p.program.is_discrete() as i32,
        None => -1,
    }
}

/// Default options: automatic backend, 100000 samples, seed 1.
#[no_mangle]
pub extern "C" fn fun_infer_options_default() -> FunInferOptions {
    let d = InferOptions::default();
    FunInferOptions {
        backend: FunBackend::Auto,
        samples: d.samples as u64,
        seed: d.seed,
        max_support: d.max_support as u64,
        max_choices: d.max_choices,
    }
}

unsafe fn with_program(
    p: *const FunProgram,
    out: *mut *mut c_char,
    f: impl FnOnce(&Program) -> Result<String, Error>,
) -> FunStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            set_error("null program".into());
            return FunStatus::NullArgument;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return FunStatus::NullArgument;
        }
        *out = ptr::null_mut();
        match f(&p.program) {
            Ok(s) => hand_out(s, out),
            Err(e) => fail(&e),
        }
    })
}

/// Run inference; `*out` receives the JSON report (backend, posterior, evidence, diagnostics, seed).
/// A null `options` means the defaults.
///
/// # Safety
/// `p` must be a live program, `options` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fun_infer(p: *const FunProgram, options: *const FunInferOptions, out: *mut *mut c_char) -> FunStatus {
    let o = options.as_ref().copied().unwrap_or_else(|| fun_infer_options_default());
    with_program(p, out, |prog| {
        let backend = match o.backend {
            FunBackend::Auto if prog.is_discrete() => Backend::Enum,
            FunBackend::Auto => Backend::Mc,
            FunBackend::Enum => Backend::Enum,
            FunBackend::Mt => Backend::Mt,
            FunBackend::Imp => Backend::Imp,
            FunBackend::Fg => Backend::Fg,
            FunBackend::Mc => Backend::Mc,
        };
        let opts = InferOptions {
            samples: o.samples as usize,
            seed: o.seed,
            max_support: o.max_support as usize,
            max_choices: o.max_choices,
        };
        Ok(infer(prog, backend, &opts)?.to_string())
    })
}

/// The compiled Imp program as text.
///
/// # Safety
/// As for `fun_infer`.
#[no_mangle]
pub unsafe extern "C" fn fun_compile_imp(p: *const FunProgram, out: *mut *mut c_char) -> FunStatus {
    with_program(p, out, |prog| {
        let c = compile(&prog.core)?;
        c.check_static()?;
        Ok(c.body.to_string())
    })
}

/// The factor graph in Graphviz DOT.
///
/// # Safety
/// As for `fun_infer`.
#[no_mangle]
pub unsafe extern "C" fn fun_graph_dot(p: *const FunProgram, out: *mut *mut c_char) -> FunStatus {
    with_program(p, out, |prog| Ok(to_dot(&program_graph(&prog.core)?.graph)))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fun_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failing call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fun_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
