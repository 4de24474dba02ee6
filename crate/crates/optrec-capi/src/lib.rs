//! C ABI for the optrec solver.
//!
//! All entry points are `unsafe extern "C"`; callers own the raw pointers.
//! The pattern throughout: functions return an [`OptrecStatus`], write their
//! result through an out-pointer, and record a detailed message retrievable
//! via [`optrec_last_error`] on failure. Strings returned through
//! out-pointers are heap-allocated and must be released with
//! [`optrec_string_free`]; problems with [`optrec_problem_free`].
//!
//! The generated header lives at `include/optrec.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use optrec::linalg::Mat;
use optrec::local::LocalMethod;
use optrec::model::{self, Geometry, ProblemInstance};
use optrec::{global, local, report, Error};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptrecStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The instance JSON could not be parsed.
    ParseError = 3,
    /// The instance is structurally invalid (shapes, budgets, subspace).
    InvalidInstance = 4,
    /// No vector is consistent with the data, or only boundary cases are.
    Infeasible = 5,
    /// The solver could not produce a certified answer.
    SolveError = 6,
}

/// Opaque handle: a validated problem instance plus its derived geometry.
pub struct OptrecProblem {
    inst: ProblemInstance,
    geom: Geometry,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: &str) {
    let sanitized: String = msg
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(e: &Error) -> OptrecStatus {
    match e {
        Error::Parse(_) => OptrecStatus::ParseError,
        Error::Validation(_) | Error::Domain(_) => OptrecStatus::InvalidInstance,
        Error::EmptyConsistentSet { .. } | Error::StrictFeasibility(_) => OptrecStatus::Infeasible,
        _ => OptrecStatus::SolveError,
    }
}

fn fail(e: &Error) -> OptrecStatus {
    set_last_error(&e.to_string());
    status_of(e)
}

/// Runs `f` with panics converted into `SolveError` so unwinding never
/// crosses the FFI boundary.
fn guarded(f: impl FnOnce() -> OptrecStatus) -> OptrecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_last_error("internal panic in the solver");
            OptrecStatus::SolveError
        }
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, OptrecStatus> {
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        OptrecStatus::InvalidUtf8
    })
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn optrec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message from the most recent failure on this thread, or an
/// empty string. The pointer stays valid until the next failing call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn optrec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates an instance from JSON.
///
/// On success writes a heap-allocated handle through `out` and returns
/// `Ok`; the caller must release it with [`optrec_problem_free`].
///
/// # Safety
///
/// `json` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer; both must be non-null.
#[no_mangle]
pub unsafe extern "C" fn optrec_problem_parse(
    json: *const c_char,
    out: *mut *mut OptrecProblem,
) -> OptrecStatus {
    if json.is_null() || out.is_null() {
        set_last_error("json and out must be non-null");
        return OptrecStatus::NullArgument;
    }
    let text = match utf8_arg(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guarded(|| {
        let inst = match ProblemInstance::from_json_str(text) {
            Ok(i) => i,
            Err(e) => return fail(&e),
        };
        let geom = match model::validate(&inst) {
            Ok(g) => g,
            Err(e) => return fail(&e),
        };
        *out = Box::into_raw(Box::new(OptrecProblem { inst, geom }));
        OptrecStatus::Ok
    })
}

/// Releases a handle returned by [`optrec_problem_parse`]. Null is a no-op.
///
/// # Safety
///
/// `p` must be a pointer previously returned through
/// [`optrec_problem_parse`] and not freed since.
#[no_mangle]
pub unsafe extern "C" fn optrec_problem_free(p: *mut OptrecProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Releases a string returned through an out-pointer. Null is a no-op.
///
/// # Safety
///
/// `s` must be a string previously returned by this library and not freed
/// since.
#[no_mangle]
pub unsafe extern "C" fn optrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn emit_json(out: *mut *mut c_char, json: String) -> OptrecStatus {
    match CString::new(json) {
        Ok(c) => {
            *out = c.into_raw();
            OptrecStatus::Ok
        }
        Err(_) => {
            set_last_error("report contained an interior NUL byte");
            OptrecStatus::SolveError
        }
    }
}

/// Computes the Chebyshev center and radius for the instance's data vector
/// and writes the JSON report through `out_json`.
///
/// `method` selects the route: "auto", "eigen", "ball", or "sdp"; pass null
/// for "auto". `tol` is the root-finding tolerance (1e-10 is a good
/// default).
///
/// # Safety
///
/// `p` must be a live handle from [`optrec_problem_parse`]; `out_json` must
/// be non-null and writable; `method`, if non-null, must be
/// NUL-terminated. Free the string with [`optrec_string_free`].
#[no_mangle]
pub unsafe extern "C" fn optrec_solve_local(
    p: *const OptrecProblem,
    method: *const c_char,
    tol: f64,
    out_json: *mut *mut c_char,
) -> OptrecStatus {
    if p.is_null() || out_json.is_null() {
        set_last_error("p and out_json must be non-null");
        return OptrecStatus::NullArgument;
    }
    let method = if method.is_null() {
        LocalMethod::Auto
    } else {
        let text = match utf8_arg(method) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match text.parse() {
            Ok(m) => m,
            Err(e) => return fail(&e),
        }
    };
    let prob = &*p;
    guarded(|| {
        let sol = match local::solve_local(&prob.inst, &prob.geom, method, tol) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let json = report::local_report(&prob.inst, &sol, None, Vec::new()).to_json();
        emit_json(out_json, json)
    })
}

/// Computes the optimal linear recovery map (or, when `tau` is non-null,
/// the certified map at that trade-off weight) and writes the JSON report
/// through `out_json`.
///
/// # Safety
///
/// `p` must be a live handle from [`optrec_problem_parse`]; `out_json` must
/// be non-null and writable; `tau`, if non-null, must point to a readable
/// f64. Free the string with [`optrec_string_free`].
#[no_mangle]
pub unsafe extern "C" fn optrec_solve_global(
    p: *const OptrecProblem,
    tau: *const f64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> OptrecStatus {
    if p.is_null() || out_json.is_null() {
        set_last_error("p and out_json must be non-null");
        return OptrecStatus::NullArgument;
    }
    let tau = if tau.is_null() { None } else { Some(*tau) };
    let prob = &*p;
    guarded(|| {
        let sol = match global::solve_global(&prob.inst, &prob.geom, tau, tol) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let json =
            report::global_report(&prob.inst, &sol, tau.is_none(), None, Vec::new()).to_json();
        emit_json(out_json, json)
    })
}

/// Computes the certified worst-case error of a caller-supplied linear
/// recovery map and writes it through `out_value`.
///
/// `map` is row-major with `N` rows and `m` columns, where `N` is the
/// ambient dimension and `m` the number of observations; it must contain
/// exactly `N * m` doubles.
///
/// # Safety
///
/// `p` must be a live handle from [`optrec_problem_parse`]; `map` must
/// point to `N * m` readable doubles; `out_value` must be non-null and
/// writable.
#[no_mangle]
pub unsafe extern "C" fn optrec_gwce_upper_bound(
    p: *const OptrecProblem,
    map: *const f64,
    out_value: *mut f64,
) -> OptrecStatus {
    if p.is_null() || map.is_null() || out_value.is_null() {
        set_last_error("p, map, and out_value must be non-null");
        return OptrecStatus::NullArgument;
    }
    let prob = &*p;
    let n = prob.inst.ambient_dim();
    let m = prob.inst.n_obs();
    let data = std::slice::from_raw_parts(map, n * m);
    let rows: Vec<Vec<f64>> = data.chunks(m).map(|r| r.to_vec()).collect();
    let mat = Mat::from_rows(&rows);
    guarded(
        || match global::gwce_linear_bound(&prob.inst, &prob.geom, &mat) {
            Ok(v) => {
                *out_value = v;
                OptrecStatus::Ok
            }
            Err(e) => fail(&e),
        },
    )
}
