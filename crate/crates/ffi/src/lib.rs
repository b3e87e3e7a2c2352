//! C ABI over mkdv-ut. Handles are opaque; every call returns an
//! `MkdvStatus` and leaves a message for `mkdv_last_error` on failure.

use mkdv_ut::cli::{exit_code, solve_gate};
use mkdv_ut::core::mat2::c;
use mkdv_ut::core::profile::{InitialProfile, ProfileSpec};
use mkdv_ut::core::Lambda;
use mkdv_ut::rhsolver::recover::{recover_derivatives, RhProblem};
use mkdv_ut::rhsolver::solve::RhOptions;
use mkdv_ut::spectral::{build_ha, RationalRegularizer, SpectralData};
use mkdv_ut::xscatter::solve_x_col2;
use mkdv_ut::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes; 2-4 match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkdvStatus {
    MkdvOk = 0,
    MkdvNullArgument = 1,
    MkdvConfigError = 2,
    MkdvGateFailed = 3,
    MkdvNumericalError = 4,
    MkdvPanic = 5,
}

/// Spectral data with its regularizer and solver options.
pub struct MkdvProblem {
    sd: SpectralData,
    ha: RationalRegularizer,
    opts: RhOptions,
}

thread_local! {
    static LAST: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST.with(|l| *l.borrow_mut() = c);
}

fn status_of(e: &Error) -> MkdvStatus {
    match exit_code(e) {
        2 => MkdvStatus::MkdvConfigError,
        3 => MkdvStatus::MkdvGateFailed,
        _ => MkdvStatus::MkdvNumericalError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), MkdvStatus>) -> MkdvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last(String::new());
            MkdvStatus::MkdvOk
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_last("internal panic".into());
            MkdvStatus::MkdvPanic
        }
    }
}

fn fail(e: Error) -> MkdvStatus {
    set_last(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> MkdvStatus {
    set_last(format!("{what} is null"));
    MkdvStatus::MkdvNullArgument
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, MkdvStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(Error::Config(format!("{what} is not UTF-8"))))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mkdv_last_error() -> *const c_char {
    LAST.with(|l| l.borrow().as_ptr())
}

/// Build a problem from derived spectral data (the JSON written by the
/// derive stage). `options_json` may be null for defaults; `rho_a` is the
/// pole modulus of the regularizer.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkdv_problem_new(
    spectral_json: *const c_char,
    options_json: *const c_char,
    rho_a: f64,
    out: *mut *mut MkdvProblem,
) -> MkdvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let s = text(spectral_json, "spectral_json")?;
        let sd: SpectralData = serde_json::from_str(s).map_err(|e| fail(Error::Config(e.to_string())))?;
        let opts: RhOptions = if options_json.is_null() {
            RhOptions::default()
        } else {
            serde_json::from_str(text(options_json, "options_json")?).map_err(|e| fail(Error::Config(e.to_string())))?
        };
        opts.check().map_err(fail)?;
        let hj = sd.coeffs.h.clone().ok_or_else(|| fail(Error::Config("spectral data lacks h coefficients".into())))?;
        let h0 = sd.h0.ok_or_else(|| fail(Error::Config("spectral data lacks h(0)".into())))?;
        let ha = build_ha(h0, &hj, rho_a).map_err(fail)?;
        *out = Box::into_raw(Box::new(MkdvProblem { sd, ha, opts }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `mkdv_problem_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mkdv_problem_free(p: *mut MkdvProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Global-relation and zero-count gate; MKDV_GATE_FAILED when it refuses.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mkdv_problem_gate(p: *const MkdvProblem, gr_threshold: f64) -> MkdvStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        solve_gate(&p.sd, gr_threshold).map_err(fail)
    })
}

/// u, u_x, u_xx at (x, t) into `out[0..3]`; `im_u` (nullable) receives
/// the imaginary part left by quadrature.
///
/// # Safety
/// `p` must be a live handle and `out` hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn mkdv_problem_solve(p: *const MkdvProblem, x: f64, t: f64, out: *mut f64, im_u: *mut f64) -> MkdvStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rh = RhProblem::new(&p.sd, &p.ha, p.opts.clone());
        let sol = rh.solve(x, t).map_err(fail)?;
        let r = recover_derivatives(&sol, p.sd.lambda);
        let o = std::slice::from_raw_parts_mut(out, 3);
        o.copy_from_slice(&[r.u, r.u_x, r.u_xx]);
        if !im_u.is_null() {
            *im_u = r.im[0];
        }
        Ok(())
    })
}

/// a(k), b(k) for Im k <= 0 as (re a, im a, re b, im b). `lambda` is +1 or
/// -1; `profile_json` is a profile descriptor as in the config files.
///
/// # Safety
/// `profile_json` must be NUL-terminated and `out` hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn mkdv_scatter_x(
    lambda: i32,
    profile_json: *const c_char,
    l_trunc: f64,
    k_re: f64,
    k_im: f64,
    out: *mut f64,
) -> MkdvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let lam = Lambda::try_from(lambda).map_err(|e| fail(Error::Config(e)))?;
        let spec: ProfileSpec =
            serde_json::from_str(text(profile_json, "profile_json")?).map_err(|e| fail(Error::Config(e.to_string())))?;
        let ip = InitialProfile::new(lam, &spec, l_trunc).map_err(fail)?;
        let v = solve_x_col2(&ip, c(k_re, k_im), 1e-12).map_err(fail)?.first();
        let o = std::slice::from_raw_parts_mut(out, 4);
        o.copy_from_slice(&[v[1].re, v[1].im, v[0].re, v[0].im]);
        Ok(())
    })
}
