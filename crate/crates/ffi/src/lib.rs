//! C ABI over `scs-core`.
//!
//! Problems and results are opaque handles created and released by this
//! library. Every function returns an [`ScsStatus`]; on failure a message
//! is available from [`scs_last_error`] on the same thread. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use scs_core::cli::{load_instance, InstanceFormat};
use scs_core::model::{enumerate_support, native, true_objective, TwoStageProblem, SUPPORT_LIMIT};
use scs_core::scs::{run, SamplingMode, ScsParams, SolveReport, Termination};

/// Opaque problem handle.
pub struct ScsProblem {
    inner: TwoStageProblem,
}

/// Opaque solve result handle.
pub struct ScsResult {
    report: SolveReport,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolverError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScsFormat {
    /// SMPS for `.cor`/`.core` paths, native otherwise.
    Auto = 0,
    Smps = 1,
    Native = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScsTermination {
    Converged = 0,
    MaxIterReached = 1,
    UniqueFeasiblePoint = 2,
    Stalled = 3,
}

/// Solver parameters; obtain defaults from [`scs_params_default`].
/// Fields left out here keep their library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ScsSolverParams {
    pub eps: f64,
    pub m1: f64,
    pub m2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma: f64,
    pub delta0: f64,
    pub delta_max: f64,
    /// Non-positive means "derive from a pilot sample".
    pub kappa: f64,
    pub kappa_eps: f64,
    pub max_iter: u64,
    pub max_sample: u64,
    pub seed: u64,
    /// Non-zero solves on the full finite support.
    pub full_support: i32,
}

impl From<&ScsSolverParams> for ScsParams {
    fn from(p: &ScsSolverParams) -> Self {
        ScsParams {
            eps: p.eps,
            m1: p.m1,
            m2: p.m2,
            eta1: p.eta1,
            eta2: p.eta2,
            gamma: p.gamma,
            delta0: p.delta0,
            delta_max: p.delta_max,
            kappa: (p.kappa > 0.0).then_some(p.kappa),
            kappa_eps: p.kappa_eps,
            max_iter: p.max_iter as usize,
            max_sample: p.max_sample as usize,
            seed: p.seed,
            sampling: if p.full_support != 0 { SamplingMode::FullSupport } else { SamplingMode::Adaptive },
            ..ScsParams::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: ScsStatus, msg: impl Into<String>) -> ScsStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`ScsStatus::Panic`].
fn guard(f: impl FnOnce() -> ScsStatus) -> ScsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == ScsStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(ScsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, ScsStatus> {
    if s.is_null() {
        return Err(fail(ScsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(ScsStatus::InvalidArgument, "string is not valid UTF-8"))
}

fn into_handle<T>(value: T, out: *mut *mut T) -> ScsStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    ScsStatus::Ok
}

/// Message describing the last failure on this thread, or null. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn scs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn scs_params_default() -> ScsSolverParams {
    let d = ScsParams::default();
    ScsSolverParams {
        eps: d.eps,
        m1: d.m1,
        m2: d.m2,
        eta1: d.eta1,
        eta2: d.eta2,
        gamma: d.gamma,
        delta0: d.delta0,
        delta_max: d.delta_max,
        kappa: 0.0,
        kappa_eps: d.kappa_eps,
        max_iter: d.max_iter as u64,
        max_sample: d.max_sample as u64,
        seed: d.seed,
        full_support: 0,
    }
}

/// Loads a problem from a native file or the core file of an SMPS triple.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scs_problem_load(path: *const c_char, format: ScsFormat, out: *mut *mut ScsProblem) -> ScsStatus {
    guard(|| {
        if out.is_null() {
            return fail(ScsStatus::NullPointer, "null output pointer");
        }
        let path = match c_str(path) {
            Ok(p) => Path::new(p),
            Err(s) => return s,
        };
        let fmt = match format {
            ScsFormat::Auto => InstanceFormat::infer(path),
            ScsFormat::Smps => InstanceFormat::Smps,
            ScsFormat::Native => InstanceFormat::Native,
        };
        match load_instance(path, fmt) {
            Ok(p) => into_handle(ScsProblem { inner: p }, out),
            Err(e) => fail(ScsStatus::ParseError, e.to_string()),
        }
    })
}

/// Parses a problem from native-format text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scs_problem_parse_native(text: *const c_char, out: *mut *mut ScsProblem) -> ScsStatus {
    guard(|| {
        if out.is_null() {
            return fail(ScsStatus::NullPointer, "null output pointer");
        }
        let text = match c_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match native::parse_native(text) {
            Ok(p) => into_handle(ScsProblem { inner: p }, out),
            Err(e) => fail(ScsStatus::ParseError, e.to_string()),
        }
    })
}

/// First- and second-stage dimensions.
///
/// # Safety
/// `problem` must come from this library; `n1` and `n2` may be null.
#[no_mangle]
pub unsafe extern "C" fn scs_problem_dims(problem: *const ScsProblem, n1: *mut usize, n2: *mut usize) -> ScsStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(ScsStatus::NullPointer, "null problem");
        };
        if !n1.is_null() {
            *n1 = p.inner.n1();
        }
        if !n2.is_null() {
            *n2 = p.inner.n2();
        }
        ScsStatus::Ok
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scs_problem_free(problem: *mut ScsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs SCS. `params` may be null for defaults.
///
/// # Safety
/// `problem` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scs_solve(problem: *const ScsProblem, params: *const ScsSolverParams, out: *mut *mut ScsResult) -> ScsStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(ScsStatus::NullPointer, "null problem");
        };
        if out.is_null() {
            return fail(ScsStatus::NullPointer, "null output pointer");
        }
        let params = params.as_ref().map_or_else(ScsParams::default, ScsParams::from);
        if let Err(e) = params.validate() {
            return fail(ScsStatus::InvalidArgument, e.to_string());
        }
        match run(&p.inner, &params) {
            Ok(report) => into_handle(ScsResult { report }, out),
            Err(e) => fail(ScsStatus::SolverError, e.to_string()),
        }
    })
}

/// Exact objective at `x` over the full finite support.
///
/// # Safety
/// `x` must point to `len` doubles and `value` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scs_true_objective(problem: *const ScsProblem, x: *const f64, len: usize, value: *mut f64) -> ScsStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(ScsStatus::NullPointer, "null problem");
        };
        if x.is_null() || value.is_null() {
            return fail(ScsStatus::NullPointer, "null argument");
        }
        if len != p.inner.n1() {
            return fail(ScsStatus::InvalidArgument, format!("x has length {len}, expected {}", p.inner.n1()));
        }
        let xs = std::slice::from_raw_parts(x, len);
        let set = match enumerate_support(&p.inner, SUPPORT_LIMIT) {
            Ok(s) => s,
            Err(e) => return fail(ScsStatus::InvalidArgument, e.to_string()),
        };
        match true_objective(&p.inner, &set, xs) {
            Ok(v) => {
                *value = v;
                ScsStatus::Ok
            }
            Err(e) => fail(ScsStatus::SolverError, e.to_string()),
        }
    })
}

/// In-sample objective at the final incumbent.
///
/// # Safety
/// `result` must come from this library and `value` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn scs_result_value(result: *const ScsResult, value: *mut f64) -> ScsStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(ScsStatus::NullPointer, "null result");
        };
        if value.is_null() {
            return fail(ScsStatus::NullPointer, "null output pointer");
        }
        *value = r.report.value;
        ScsStatus::Ok
    })
}

/// Copies the final incumbent into `buf`. With a null `buf` or too small
/// `len`, only `*needed` is set.
///
/// # Safety
/// `buf` must point to `len` writable doubles unless null; `needed` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn scs_result_x(result: *const ScsResult, buf: *mut f64, len: usize, needed: *mut usize) -> ScsStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(ScsStatus::NullPointer, "null result");
        };
        let n = r.report.x.len();
        if !needed.is_null() {
            *needed = n;
        }
        if buf.is_null() || len < n {
            return fail(ScsStatus::BufferTooSmall, format!("need room for {n} values"));
        }
        ptr::copy_nonoverlapping(r.report.x.as_ptr(), buf, n);
        ScsStatus::Ok
    })
}

/// Number of iterations run and how the loop ended.
///
/// # Safety
/// `result` must come from this library; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn scs_result_summary(
    result: *const ScsResult,
    iterations: *mut usize,
    termination: *mut ScsTermination,
) -> ScsStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(ScsStatus::NullPointer, "null result");
        };
        if !iterations.is_null() {
            *iterations = r.report.history.len();
        }
        if !termination.is_null() {
            *termination = match r.report.termination {
                Termination::Converged => ScsTermination::Converged,
                Termination::MaxIterReached => ScsTermination::MaxIterReached,
                Termination::UniqueFeasiblePoint => ScsTermination::UniqueFeasiblePoint,
                Termination::Stalled => ScsTermination::Stalled,
            };
        }
        ScsStatus::Ok
    })
}

/// Writes the iteration history as CSV.
///
/// # Safety
/// `result` must come from this library and `path` be a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn scs_result_write_csv(result: *const ScsResult, path: *const c_char) -> ScsStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(ScsStatus::NullPointer, "null result");
        };
        let path = match c_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(ScsStatus::InvalidArgument, format!("{path}: {e}")),
        };
        match scs_core::history::write_csv(&r.report.history, file) {
            Ok(()) => ScsStatus::Ok,
            Err(e) => fail(ScsStatus::InvalidArgument, format!("{path}: {e}")),
        }
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scs_result_free(result: *mut ScsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
