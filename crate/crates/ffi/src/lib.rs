//! C interface to the `netcontract` solver.
//!
//! Models and solutions are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`NcStatus`]; on failure a description is available from
//! [`nc_last_error_message`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netcontract::model::check_assumptions;
use netcontract::{equilibrium, parse_model, solve_with, ContractSolution, Error, ModelInstance, SolveOptions};

/// Result codes. Values 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    Validation = 2,
    Assumption = 3,
    Numeric = 4,
    Consistency = 5,
    NullPointer = 10,
    InvalidArgument = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Which per-agent vector of a solution to copy out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcField {
    V = 0,
    Z = 1,
    Effort = 2,
    CertaintyEquivalent = 3,
}

/// Opaque model handle.
pub struct NcModel {
    inner: ModelInstance,
}

/// Opaque solution handle.
pub struct NcSolution {
    inner: ContractSolution,
    labels: Vec<String>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NcAssumptionReport {
    pub rho1: f64,
    pub rho2: f64,
    pub a1_holds: bool,
    pub a2_holds: bool,
    pub generalized: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> NcStatus {
    match e.exit_code() {
        2 => NcStatus::Validation,
        3 => NcStatus::Assumption,
        5 => NcStatus::Consistency,
        _ => NcStatus::Numeric,
    }
}

fn fail(status: NcStatus, msg: impl Into<String>) -> NcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> NcStatus) -> NcStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(NcStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, NcStatus> {
    if p.is_null() {
        return Err(fail(NcStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NcStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// Last error message on this thread, or null. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a model from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_model_from_json(json: *const c_char, out: *mut *mut NcModel) -> NcStatus {
    guard(|| {
        if out.is_null() {
            return fail(NcStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_model(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NcModel { inner }));
                NcStatus::Ok
            }
            Err(e) => fail(NcStatus::Validation, e.to_string()),
        }
    })
}

/// # Safety
/// `model` must come from [`nc_model_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_model_free(model: *mut NcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_model_agent_count(model: *const NcModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.n())
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_check_assumptions(model: *const NcModel, out: *mut NcAssumptionReport) -> NcStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(NcStatus::NullPointer, "null argument");
        };
        match check_assumptions(&m.inner) {
            Ok(r) => {
                *out = NcAssumptionReport {
                    rho1: r.rho1,
                    rho2: r.rho2,
                    a1_holds: r.a1_holds,
                    a2_holds: r.a2_holds,
                    generalized: r.generalized,
                };
                NcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Solves for the optimal contract. With `unsafe_mode` the spectral gates are
/// skipped.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_solve(model: *const NcModel, unsafe_mode: bool, out: *mut *mut NcSolution) -> NcStatus {
    guard(|| {
        if out.is_null() {
            return fail(NcStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(m) = model.as_ref() else {
            return fail(NcStatus::NullPointer, "null model");
        };
        match solve_with(&m.inner, &SolveOptions { unsafe_mode }) {
            Ok(inner) => {
                let labels = m.inner.labels().to_vec();
                *out = Box::into_raw(Box::new(NcSolution { inner, labels }));
                NcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `solution` must come from [`nc_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nc_solution_free(solution: *mut NcSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Principal's expected profit, NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_solution_profit(solution: *const NcSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.profit)
}

/// Copies one per-agent vector into `buf`, which must hold `len >= n` values.
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nc_solution_copy(
    solution: *const NcSolution,
    field: NcField,
    buf: *mut f64,
    len: usize,
) -> NcStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), buf.is_null()) else {
            return fail(NcStatus::NullPointer, "null argument");
        };
        let src = match field {
            NcField::V => &s.inner.contract.v,
            NcField::Z => &s.inner.contract.z,
            NcField::Effort => &s.inner.efforts,
            NcField::CertaintyEquivalent => &s.inner.ce,
        };
        if len < src.len() {
            return fail(NcStatus::BufferTooSmall, format!("buffer holds {len} values, need {}", src.len()));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        NcStatus::Ok
    })
}

/// Serializes a solution to JSON. Release the string with [`nc_string_free`].
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_solution_to_json(solution: *const NcSolution, out: *mut *mut c_char) -> NcStatus {
    guard(|| {
        if out.is_null() {
            return fail(NcStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(s) = solution.as_ref() else {
            return fail(NcStatus::NullPointer, "null solution");
        };
        let mut value = match serde_json::to_value(&s.inner) {
            Ok(v) => v,
            Err(e) => return fail(NcStatus::Numeric, e.to_string()),
        };
        value["agents"] = serde_json::json!(s.labels);
        match CString::new(value.to_string()) {
            Ok(c) => {
                *out = c.into_raw();
                NcStatus::Ok
            }
            Err(e) => fail(NcStatus::Numeric, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Nash efforts under the piece rates `v` (length `n`), written to `out`.
///
/// # Safety
/// `model` must be a live handle, `v` valid for `n` reads and `out` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn nc_nash_efforts(model: *const NcModel, v: *const f64, n: usize, out: *mut f64) -> NcStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(NcStatus::NullPointer, "null model");
        };
        if v.is_null() || out.is_null() {
            return fail(NcStatus::NullPointer, "null buffer");
        }
        if n != m.inner.n() {
            return fail(NcStatus::InvalidArgument, format!("expected {} piece rates, got {n}", m.inner.n()));
        }
        let rates = netcontract::DVector::from_column_slice(std::slice::from_raw_parts(v, n));
        match equilibrium::nash_efforts(&m.inner, &rates) {
            Ok(a) => {
                ptr::copy_nonoverlapping(a.as_ptr(), out, n);
                NcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}
