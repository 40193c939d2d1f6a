//! C ABI over the `pseudoinv` solver.
//!
//! Every entry point returns a [`PseudoinvStatus`]; on failure the message
//! is kept per thread and read back with [`pseudoinv_last_error_message`].
//! Solutions are opaque handles created by `pseudoinv_solution_new_*` and
//! released with [`pseudoinv_solution_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pseudoinv::cli::config::RunConfig;
use pseudoinv::invariant::Scenario;
use pseudoinv::observables::moments_closed_form;
use pseudoinv::oracle::pt_inner_product;
use pseudoinv::wavepacket::Solution;
use pseudoinv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoinvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    ValidityWindow = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PseudoinvComplex {
    pub re: c_double,
    pub im: c_double,
}

/// η-moments at one time.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PseudoinvMoments {
    pub t: c_double,
    pub x_re: c_double,
    pub x_im: c_double,
    pub p_re: c_double,
    pub p_im: c_double,
    pub dx: c_double,
    pub dp: c_double,
    pub product: c_double,
    pub norm: c_double,
}

/// Opaque solution handle.
pub struct PseudoinvSolution {
    inner: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> PseudoinvStatus {
    match err {
        Error::ValidityWindow { .. } => PseudoinvStatus::ValidityWindow,
        Error::Profile(_) | Error::Scenario(_) | Error::Unsupported(_) => PseudoinvStatus::Config,
        Error::Domain { .. } => PseudoinvStatus::InvalidArgument,
        _ => PseudoinvStatus::Numerical,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<(), (PseudoinvStatus, String)>) -> PseudoinvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PseudoinvStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_owned());
            PseudoinvStatus::Panic
        }
    }
}

fn model<T>(result: pseudoinv::Result<T>) -> Result<T, (PseudoinvStatus, String)> {
    result.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PseudoinvStatus, String) {
    (PseudoinvStatus::NullPointer, format!("{what} is null"))
}

fn finite(name: &str, value: f64) -> Result<f64, (PseudoinvStatus, String)> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err((PseudoinvStatus::InvalidArgument, format!("{name} is not finite: {value}")))
    }
}

unsafe fn handle<'a>(solution: *const PseudoinvSolution) -> Result<&'a Solution, (PseudoinvStatus, String)> {
    solution.as_ref().map(|s| &s.inner).ok_or_else(|| null("solution"))
}

unsafe fn store_solution(out: *mut *mut PseudoinvSolution, inner: Solution) {
    *out = Box::into_raw(Box::new(PseudoinvSolution { inner }));
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pseudoinv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Reference scenario: m = 1, f = cos t, a0 = 1, b0 = 2, d = 1, x0 = p0 = 1.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_new_reference(out: *mut *mut PseudoinvSolution) -> PseudoinvStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = model(Solution::new(&Scenario::reference()))?;
        store_solution(out, inner);
        Ok(())
    })
}

/// Builds a solution from TOML text in the command-line config format.
/// Table profiles resolve relative to the working directory.
///
/// # Safety
/// `config` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_new_from_config(
    config: *const c_char,
    out: *mut *mut PseudoinvSolution,
) -> PseudoinvStatus {
    guarded(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| (PseudoinvStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let parsed = RunConfig::from_toml(text).map_err(|e| (PseudoinvStatus::Config, e.to_string()))?;
        let scenario = model(parsed.scenario(None))?;
        let inner = model(Solution::new(&scenario))?;
        store_solution(out, inner);
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `solution` must come from a `pseudoinv_solution_new_*` call and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_free(solution: *mut PseudoinvSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Horizon T of the solution's time grid.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_horizon(
    solution: *const PseudoinvSolution,
    out: *mut c_double,
) -> PseudoinvStatus {
    guarded(|| {
        let s = handle(solution)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.scenario.grid.t_end;
        Ok(())
    })
}

/// Closed-form packet `Ψ(x, t)` in the non-Hermitian picture.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_packet(
    solution: *const PseudoinvSolution,
    x: c_double,
    t: c_double,
    out: *mut PseudoinvComplex,
) -> PseudoinvStatus {
    guarded(|| {
        let s = handle(solution)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = model(s.packet(finite("x", x)?, finite("t", t)?))?;
        *out = PseudoinvComplex { re: v.re, im: v.im };
        Ok(())
    })
}

/// Physical density `|ρΨ(x, t)|²`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_density(
    solution: *const PseudoinvSolution,
    x: c_double,
    t: c_double,
    out: *mut c_double,
) -> PseudoinvStatus {
    guarded(|| {
        let s = handle(solution)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = model(s.density(finite("x", x)?, finite("t", t)?))?;
        Ok(())
    })
}

/// Closed-form η-moments at `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_moments(
    solution: *const PseudoinvSolution,
    t: c_double,
    out: *mut PseudoinvMoments,
) -> PseudoinvStatus {
    guarded(|| {
        let s = handle(solution)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = model(moments_closed_form(s, finite("t", t)?))?;
        *out = PseudoinvMoments {
            t: r.t,
            x_re: r.x_eta.re,
            x_im: r.x_eta.im,
            p_re: r.p_eta.re,
            p_im: r.p_eta.im,
            dx: r.dx,
            dp: r.dp,
            product: r.product,
            norm: r.norm,
        };
        Ok(())
    })
}

/// Closed-form PT overlap `∫φ_{λ′}φ_λ dx` at `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pseudoinv_solution_pt_inner_product(
    solution: *const PseudoinvSolution,
    lambda_prime: c_double,
    lambda: c_double,
    t: c_double,
    out: *mut PseudoinvComplex,
) -> PseudoinvStatus {
    guarded(|| {
        let s = handle(solution)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (lambda_prime, lambda) = (finite("lambda_prime", lambda_prime)?, finite("lambda", lambda)?);
        let v = model(pt_inner_product(lambda_prime, lambda, finite("t", t)?, &s.coeffs))?;
        *out = PseudoinvComplex { re: v.re, im: v.im };
        Ok(())
    })
}
