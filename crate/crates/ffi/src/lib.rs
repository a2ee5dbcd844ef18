//! C interface. Objects live behind opaque handles created by `*_new_*` functions and released
//! with the matching `*_free`. Every fallible call returns an integer status (`SGQEI_OK` on
//! success) and writes results through out-pointers; the text of the last error on the calling
//! thread is available from `sgqei_last_error`.

use sgqei::geometry::Worldline;
use sgqei::qei::{k0, qei_verify, BoundOptions, Verdict};
use sgqei::series::{identity_sums, McConfig, ModelParams};
use sgqei::smearing::{AdiabaticCutoff, SmearingFunction};
use sgqei::states::StateW;
use sgqei::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

pub const SGQEI_OK: i32 = 0;
pub const SGQEI_ERR_NULL: i32 = 1;
pub const SGQEI_ERR_DOMAIN: i32 = 2;
pub const SGQEI_ERR_RANGE: i32 = 3;
pub const SGQEI_ERR_INPUT: i32 = 4;
pub const SGQEI_ERR_NUMERICAL: i32 = 5;
pub const SGQEI_ERR_NEAR_NULL: i32 = 6;
pub const SGQEI_ERR_CONFIG: i32 = 7;
pub const SGQEI_ERR_IO: i32 = 8;
pub const SGQEI_ERR_PANIC: i32 = 9;

pub const SGQEI_VERDICT_SATISFIED: i32 = 0;
pub const SGQEI_VERDICT_VIOLATED: i32 = 1;
pub const SGQEI_VERDICT_INCONCLUSIVE: i32 = 2;

/// Timelike worldline.
pub struct SgqeiWorldline(Worldline);
/// Smearing function f(τ).
pub struct SgqeiSmearing(SmearingFunction);
/// State-dependent part W of the two-point function.
pub struct SgqeiState(StateW);

/// Result of `sgqei_qei_verify`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SgqeiQeiSummary {
    pub k0: f64,
    pub kv: f64,
    pub kh: f64,
    pub energy: f64,
    pub sigma: f64,
    pub verdict: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => SGQEI_ERR_DOMAIN,
        Error::Range { .. } => SGQEI_ERR_RANGE,
        Error::Input(_) => SGQEI_ERR_INPUT,
        Error::Numerical(_) => SGQEI_ERR_NUMERICAL,
        Error::NearNull { .. } => SGQEI_ERR_NEAR_NULL,
        Error::Config(_) => SGQEI_ERR_CONFIG,
        Error::Io(_) => SGQEI_ERR_IO,
    }
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SGQEI_OK,
        Ok(Err((c, m))) => {
            set_error(m);
            c
        }
        Err(_) => {
            set_error("internal panic".into());
            SGQEI_ERR_PANIC
        }
    }
}

fn lib_err(e: Error) -> (i32, String) {
    (code(&e), e.to_string())
}

fn null_err(what: &str) -> (i32, String) {
    (SGQEI_ERR_NULL, format!("null pointer: {what}"))
}

unsafe fn write_handle<T>(out: *mut *mut T, v: T) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err(null_err("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (i32, String)> {
    p.as_ref().ok_or_else(|| null_err(what))
}

/// Copy the last error message on this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length in bytes, or 0 if there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn sgqei_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_worldline_new_static(out: *mut *mut SgqeiWorldline) -> i32 {
    guard(|| write_handle(out, SgqeiWorldline(Worldline::static_line())))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_worldline_new_boosted(eta: f64, out: *mut *mut SgqeiWorldline) -> i32 {
    guard(|| {
        if !eta.is_finite() {
            return Err((SGQEI_ERR_INPUT, format!("rapidity must be finite, got {eta}")));
        }
        write_handle(out, SgqeiWorldline(Worldline::boosted(eta)))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_worldline_new_accelerated(a: f64, out: *mut *mut SgqeiWorldline) -> i32 {
    guard(|| write_handle(out, SgqeiWorldline(Worldline::accelerated(a).map_err(lib_err)?)))
}

/// # Safety
/// `p` must come from a `sgqei_worldline_new_*` call, or be null.
#[no_mangle]
pub unsafe extern "C" fn sgqei_worldline_free(p: *mut SgqeiWorldline) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn new_smearing(f: SmearingFunction, out: *mut *mut SgqeiSmearing) -> i32 {
    guard(|| {
        f.validate().map_err(lib_err)?;
        write_handle(out, SgqeiSmearing(f))
    })
}

/// amplitude · exp(−(τ−center)²/2σ²).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_smearing_new_gaussian(sigma: f64, center: f64, amplitude: f64, out: *mut *mut SgqeiSmearing) -> i32 {
    new_smearing(SmearingFunction::gaussian(sigma).centered(center).scaled(amplitude), out)
}

/// Compactly supported bump of the given radius.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_smearing_new_bump(radius: f64, center: f64, amplitude: f64, out: *mut *mut SgqeiSmearing) -> i32 {
    new_smearing(SmearingFunction::bump(radius).centered(center).scaled(amplitude), out)
}

/// # Safety
/// `p` must come from a `sgqei_smearing_new_*` call, or be null.
#[no_mangle]
pub unsafe extern "C" fn sgqei_smearing_free(p: *mut SgqeiSmearing) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_state_new_vacuum(out: *mut *mut SgqeiState) -> i32 {
    guard(|| write_handle(out, SgqeiState(StateW::Vacuum)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_state_new_thermal_window(e0: f64, e1: f64, b: f64, out: *mut *mut SgqeiState) -> i32 {
    guard(|| write_handle(out, SgqeiState(StateW::thermal_window(e0, e1, b).map_err(lib_err)?)))
}

/// # Safety
/// `p` must come from a `sgqei_state_new_*` call, or be null.
#[no_mangle]
pub unsafe extern "C" fn sgqei_state_free(p: *mut SgqeiState) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Free bound K₀ split into its straight and acceleration parts.
///
/// # Safety
/// Handles must be live; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn sgqei_k0(wl: *const SgqeiWorldline, f: *const SgqeiSmearing, straight: *mut f64, accel: *mut f64) -> i32 {
    guard(|| {
        let (wl, f) = (get(wl, "worldline")?, get(f, "smearing")?);
        if straight.is_null() || accel.is_null() {
            return Err(null_err("out"));
        }
        let (s, a) = k0(&wl.0, &f.0).map_err(lib_err)?;
        *straight = s;
        *accel = a;
        Ok(())
    })
}

/// Sets `*holds` to 1 if both collapse sums at n match their closed forms exactly, else 0.
///
/// # Safety
/// `holds` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgqei_identity_sums_hold(n: u32, holds: *mut i32) -> i32 {
    guard(|| {
        if holds.is_null() {
            return Err(null_err("holds"));
        }
        *holds = identity_sums(n as usize).map_err(lib_err)?.holds() as i32;
        Ok(())
    })
}

/// Bound check with f² smearing and a Gaussian cutoff g of amplitude g0 and widths
/// (sigma0, sigma1). Orders ≤ max_order are estimated with `samples` draws from `seed`.
///
/// # Safety
/// Handles must be live; `out` valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sgqei_qei_verify(
    state: *const SgqeiState,
    wl: *const SgqeiWorldline,
    f: *const SgqeiSmearing,
    beta_sq: f64,
    g0: f64,
    sigma0: f64,
    sigma1: f64,
    max_order: u32,
    samples: u64,
    seed: u64,
    out: *mut SgqeiQeiSummary,
) -> i32 {
    guard(|| {
        let (s, wl, f) = (get(state, "state")?, get(wl, "worldline")?, get(f, "smearing")?);
        if out.is_null() {
            return Err(null_err("out"));
        }
        let p = ModelParams::new(beta_sq, AdiabaticCutoff::gaussian(g0, sigma0, sigma1)).map_err(lib_err)?;
        let cfg = McConfig { samples: samples as usize, seed, max_order: max_order as usize, threads: 1, ..McConfig::default() };
        let r = qei_verify(&s.0, &wl.0, &f.0, &p, max_order as usize, &cfg, &BoundOptions::default()).map_err(lib_err)?;
        *out = SgqeiQeiSummary {
            k0: r.k0(),
            kv: r.kv.value,
            kh: r.kh.value,
            energy: r.energy(),
            sigma: r.sigma(),
            verdict: match r.verdict {
                Verdict::Satisfied => SGQEI_VERDICT_SATISFIED,
                Verdict::ViolatedWithinError => SGQEI_VERDICT_VIOLATED,
                Verdict::Inconclusive => SGQEI_VERDICT_INCONCLUSIVE,
            },
        };
        Ok(())
    })
}
