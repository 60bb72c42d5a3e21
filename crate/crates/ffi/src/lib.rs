//! C ABI over the `mrl` crate.
//!
//! Models are opaque handles created by [`mrl_model_parse`] and released with
//! [`mrl_model_free`]. Every fallible call returns an [`MrlStatus`]; on failure
//! [`mrl_last_error_message`] describes the most recent error on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mrl::{Error, HazardModel};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Singularity = 4,
    Domain = 5,
    Unsupported = 6,
    Quadrature = 7,
    TailUnbounded = 8,
    Resource = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque hazard model handle.
pub struct MrlModel {
    inner: HazardModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(e: Error) -> MrlStatus {
    let status = match &e {
        Error::Argument(_) => MrlStatus::InvalidArgument,
        Error::Singularity(_) => MrlStatus::Singularity,
        Error::Domain(_) => MrlStatus::Domain,
        Error::Parse(_) => MrlStatus::Parse,
        Error::Unsupported(_) => MrlStatus::Unsupported,
        Error::Quadrature(_) => MrlStatus::Quadrature,
        Error::TailUnbounded(_) => MrlStatus::TailUnbounded,
        Error::Resource(_) => MrlStatus::Resource,
        Error::Io(_) => MrlStatus::Io,
    };
    set_error(e.to_string());
    status
}

fn fail(status: MrlStatus, msg: &str) -> MrlStatus {
    set_error(msg.to_string());
    status
}

// Handles hold plain data, so a panic cannot leave them half-updated.
fn guard(f: impl FnOnce() -> MrlStatus) -> MrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(MrlStatus::Panic, "internal panic"),
    }
}

unsafe fn model_ref<'a>(model: *const MrlModel) -> Option<&'a HazardModel> {
    // SAFETY: caller passes a handle from mrl_model_parse or null
    unsafe { model.as_ref() }.map(|m| &m.inner)
}

/// Parses a model spec such as `weibull:shape=2,scale=1`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrl_model_parse(spec: *const c_char, out: *mut *mut MrlModel) -> MrlStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(MrlStatus::NullPointer, "null argument");
        }
        // SAFETY: checked non-null above; NUL termination is the caller's contract
        let text = match unsafe { CStr::from_ptr(spec) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(MrlStatus::Parse, "spec is not valid UTF-8"),
        };
        match text.parse::<HazardModel>() {
            Ok(inner) => {
                // SAFETY: out checked non-null
                unsafe { *out = Box::into_raw(Box::new(MrlModel { inner })) };
                MrlStatus::Ok
            }
            Err(e) => status_of(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from `mrl_model_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mrl_model_free(model: *mut MrlModel) {
    if !model.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Writes the canonical spec string into `buf` (NUL-terminated).
/// `needed` receives the required size including the terminator.
///
/// # Safety
/// `buf` must hold `len` bytes (or be null with `len` 0); `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn mrl_model_spec(
    model: *const MrlModel,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MrlStatus {
    guard(|| {
        let Some(m) = (unsafe { model_ref(model) }) else {
            return fail(MrlStatus::NullPointer, "null model");
        };
        let text = m.to_string();
        let size = text.len() + 1;
        if !needed.is_null() {
            // SAFETY: checked non-null
            unsafe { *needed = size };
        }
        if buf.is_null() || len < size {
            return fail(MrlStatus::BufferTooSmall, &format!("need {size} bytes"));
        }
        // SAFETY: buf holds at least `size` bytes
        unsafe {
            ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
            *buf.add(text.len()) = 0;
        }
        MrlStatus::Ok
    })
}

fn scalar(
    model: *const MrlModel,
    out: *mut f64,
    f: impl FnOnce(&HazardModel) -> mrl::Result<f64>,
) -> MrlStatus {
    guard(|| {
        let Some(m) = (unsafe { model_ref(model) }) else {
            return fail(MrlStatus::NullPointer, "null model");
        };
        if out.is_null() {
            return fail(MrlStatus::NullPointer, "null output");
        }
        match f(m) {
            Ok(v) => {
                // SAFETY: checked non-null
                unsafe { *out = v };
                MrlStatus::Ok
            }
            Err(e) => status_of(e),
        }
    })
}

/// r(t).
///
/// # Safety
/// `model` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mrl_hazard(model: *const MrlModel, t: f64, out: *mut f64) -> MrlStatus {
    scalar(model, out, |m| m.hazard(t))
}

/// Closed-form m(t); `Unsupported` when the model has none.
///
/// # Safety
/// `model` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mrl_mrl_closed_form(model: *const MrlModel, t: f64, out: *mut f64) -> MrlStatus {
    scalar(model, out, |m| m.mrl_closed_form(t))
}

/// m(t) by quadrature. `abs_error` may be null.
///
/// # Safety
/// `model` is a live handle; `value` is writable; `abs_error` is writable or null.
#[no_mangle]
pub unsafe extern "C" fn mrl_mrl_quadrature(
    model: *const MrlModel,
    t: f64,
    tol: f64,
    value: *mut f64,
    abs_error: *mut f64,
) -> MrlStatus {
    let mut err = 0.0;
    let status = scalar(model, value, |m| {
        mrl::mrl_quadrature(m, t, tol).map(|q| {
            err = q.abs_error_estimate;
            q.value
        })
    });
    if status == MrlStatus::Ok && !abs_error.is_null() {
        // SAFETY: checked non-null
        unsafe { *abs_error = err };
    }
    status
}

/// Partial sum Θ⁰(s) + ... + Θⁿ(s) at t.
///
/// # Safety
/// `model` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mrl_mrl_expansion(model: *const MrlModel, t: f64, n: usize, out: *mut f64) -> MrlStatus {
    scalar(model, out, |m| mrl::mrl_expansion(m, t, n).map(|(v, _)| v))
}

/// Writes Θ⁰(s)(t), ..., Θⁿ(s)(t) into `terms`, which must hold `n + 1` values.
///
/// # Safety
/// `model` is a live handle; `terms` holds `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mrl_theta_terms(
    model: *const MrlModel,
    t: f64,
    n: usize,
    terms: *mut f64,
    len: usize,
) -> MrlStatus {
    guard(|| {
        let Some(m) = (unsafe { model_ref(model) }) else {
            return fail(MrlStatus::NullPointer, "null model");
        };
        if terms.is_null() {
            return fail(MrlStatus::NullPointer, "null output");
        }
        if len < n.saturating_add(1) {
            return fail(MrlStatus::BufferTooSmall, &format!("need {} values", n.saturating_add(1)));
        }
        match mrl::theta_terms(m, t, n) {
            Ok(seq) => {
                // SAFETY: terms holds at least n + 1 values
                unsafe { ptr::copy_nonoverlapping(seq.terms.as_ptr(), terms, seq.terms.len()) };
                MrlStatus::Ok
            }
            Err(e) => status_of(e),
        }
    })
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mrl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes_cover_core_errors() {
        assert_eq!(status_of(Error::Parse("x".into())), MrlStatus::Parse);
        assert_eq!(status_of(Error::TailUnbounded("x".into())), MrlStatus::TailUnbounded);
        let msg = unsafe { CStr::from_ptr(mrl_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("tail unbounded"));
    }

    #[test]
    fn nul_in_message_is_replaced() {
        set_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(mrl_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
