//! C ABI over the OAM toolkit.
//!
//! Pancakes are opaque handles created, queried and destroyed through the
//! functions below; every fallible call returns an [`OamStatus`] and leaves
//! a human-readable message retrievable with [`oam_last_error_message`].
//! Strings returned by the library are NUL-terminated, UTF-8, and must be
//! released with [`oam_string_free`].
//!
//! The matching header is generated at build time into `include/oam.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

use libc::{c_char, size_t};
use oam_core::io;
use oam_core::{
    design_equal_populations_n2, design_general, design_suppress_p0, design_suppress_p1,
    design_suppress_p2, pancake_cn, sidebands_from_weights, weights_from_cn, Error, VortexPancake,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OamStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument was outside its documented domain.
    InvalidArgument = 2,
    /// The requested design has no solution for these parameters.
    Infeasible = 3,
    /// An iterative numerical procedure failed.
    NumericalFailure = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// An output buffer was too small; the required length was written to
    /// the length out-parameter.
    BufferTooSmall = 6,
    /// File or serialization failure.
    IoFailure = 7,
}

/// A vortex pancake: Gaussian host with nested single-charge dislocations.
/// Opaque; create with `oam_pancake_new` or one of the designers, release
/// with `oam_pancake_free`.
pub struct OamPancake {
    inner: VortexPancake,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let cleaned: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).expect("NUL bytes removed");
    });
}

fn status_of(e: &Error) -> OamStatus {
    match e {
        Error::Infeasible(_) => OamStatus::Infeasible,
        Error::Numerical(_) => OamStatus::NumericalFailure,
        Error::Io(_) | Error::Json(_) | Error::Format(_) => OamStatus::IoFailure,
        _ => OamStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> OamStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn fail_null(what: &str) -> OamStatus {
    set_error(&format!("{what} must not be NULL"));
    OamStatus::NullPointer
}

/// Copies the message of the most recent error on this thread into `buf`
/// (NUL-terminated, truncated to `cap`). Returns the full message length
/// in bytes, excluding the terminator. With a NULL `buf` only the length
/// is reported.
#[no_mangle]
pub unsafe extern "C" fn oam_last_error_message(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn oam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by an `oam_*` function that
/// documents `oam_string_free` as its deallocator, and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oam_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn string_out(text: String, out: *mut *mut c_char) -> OamStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            OamStatus::Ok
        }
        Err(_) => {
            set_error("output contained interior NUL");
            OamStatus::IoFailure
        }
    }
}

fn pancake_out(p: VortexPancake, out: *mut *mut OamPancake) -> OamStatus {
    unsafe { *out = Box::into_raw(Box::new(OamPancake { inner: p })) };
    OamStatus::Ok
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, OamStatus> {
    if s.is_null() {
        return Err(fail_null("string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        OamStatus::InvalidUtf8
    })
}

/// Creates a pancake with host waist `w0`, amplitude `a0_re + i a0_im` and
/// no vortices.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_new(
    w0: f64,
    a0_re: f64,
    a0_im: f64,
    out: *mut *mut OamPancake,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match VortexPancake::new(num_complex::Complex64::new(a0_re, a0_im), w0, Vec::new()) {
        Ok(p) => pancake_out(p, out),
        Err(e) => fail(e),
    }
}

/// Appends one single-charge vortex at polar position `(rho, phi)`.
///
/// # Safety
/// `p` must be a live pancake handle.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_add_vortex(
    p: *mut OamPancake,
    rho: f64,
    phi: f64,
) -> OamStatus {
    let Some(handle) = p.as_mut() else {
        return fail_null("pancake");
    };
    let mut vortices: Vec<(f64, f64)> =
        handle.inner.vortices().iter().map(|v| (v.rho, v.phi)).collect();
    vortices.push((rho, phi));
    match VortexPancake::new(handle.inner.a0(), handle.inner.w0(), vortices) {
        Ok(updated) => {
            handle.inner = updated;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Number of nested vortices; 0 for a NULL handle.
///
/// # Safety
/// `p` must be NULL or a live pancake handle.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_vortex_count(p: *const OamPancake) -> size_t {
    p.as_ref().map_or(0, |h| h.inner.vortex_count())
}

/// Parses the JSON document `{"w0":..., "a0":[re,im], "vortices":[[rho,phi],...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_from_json(
    json: *const c_char,
    out: *mut *mut OamPancake,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let text = match read_str(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match io::pancake_from_json(text) {
        Ok(p) => pancake_out(p, out),
        Err(e) => fail(e),
    }
}

/// Serializes the pancake to JSON; release with `oam_string_free`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_to_json(
    p: *const OamPancake,
    out: *mut *mut c_char,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let Some(handle) = p.as_ref() else {
        return fail_null("pancake");
    };
    string_out(io::pancake_to_json(&handle.inner), out)
}

/// Releases a pancake handle; NULL is a no-op.
///
/// # Safety
/// `p` must be NULL or a live handle, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_free(p: *mut OamPancake) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Closed-form spectrum of the pancake.
///
/// Writes `C_n` and `P_n` for `n = 0..=N` into the caller's arrays (either
/// may be NULL to skip it) and the mean OAM per photon into `mean_oam_out`
/// (may be NULL). `*len_out` always receives `N + 1`; when `cap` is too
/// small nothing else is written and the call returns `BufferTooSmall`.
///
/// # Safety
/// Arrays must provide `cap` writable elements; `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_spectrum(
    p: *const OamPancake,
    cn_out: *mut f64,
    pn_out: *mut f64,
    cap: size_t,
    len_out: *mut size_t,
    mean_oam_out: *mut f64,
) -> OamStatus {
    let Some(handle) = p.as_ref() else {
        return fail_null("pancake");
    };
    if len_out.is_null() {
        return fail_null("len_out");
    }
    let n = handle.inner.vortex_count();
    *len_out = n + 1;
    if cap < n + 1 {
        set_error(&format!("need capacity {} for N = {n}", n + 1));
        return OamStatus::BufferTooSmall;
    }
    let spectrum = pancake_cn(&handle.inner);
    let weights = match weights_from_cn(&spectrum) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    for k in 0..=n {
        if !cn_out.is_null() {
            *cn_out.add(k) = spectrum.c(k as i64);
        }
        if !pn_out.is_null() {
            *pn_out.add(k) = weights.p(k as i64);
        }
    }
    if !mean_oam_out.is_null() {
        *mean_oam_out = weights.mean_oam();
    }
    OamStatus::Ok
}

/// Rotational-Doppler sideband comb of the pancake at prism speed `omega`:
/// offsets `2 n omega` and weights for the occupied `n`.
///
/// # Safety
/// Arrays must provide `cap` writable elements; `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_pancake_sidebands(
    p: *const OamPancake,
    omega: f64,
    n_out: *mut i64,
    delta_omega_out: *mut f64,
    weight_out: *mut f64,
    cap: size_t,
    len_out: *mut size_t,
) -> OamStatus {
    let Some(handle) = p.as_ref() else {
        return fail_null("pancake");
    };
    if len_out.is_null() {
        return fail_null("len_out");
    }
    let weights = match weights_from_cn(&pancake_cn(&handle.inner)) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let comb = match sidebands_from_weights(&weights, omega) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    *len_out = comb.lines().len();
    if cap < comb.lines().len() {
        set_error(&format!("need capacity {} sideband lines", comb.lines().len()));
        return OamStatus::BufferTooSmall;
    }
    for (i, line) in comb.lines().iter().enumerate() {
        if !n_out.is_null() {
            *n_out.add(i) = line.n;
        }
        if !delta_omega_out.is_null() {
            *delta_omega_out.add(i) = line.delta_omega;
        }
        if !weight_out.is_null() {
            *weight_out.add(i) = line.weight;
        }
    }
    OamStatus::Ok
}

/// Two-vortex design with equal populations `P_0 = P_1 = P_2 = 1/3`;
/// `rho1` picks the point on the feasible family.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_design_equal_populations_n2(
    w0: f64,
    rho1: f64,
    out: *mut *mut OamPancake,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match design_equal_populations_n2(w0, rho1) {
        Ok(p) => pancake_out(p, out),
        Err(e) => fail(e),
    }
}

/// Two-vortex design with `P_0 = 0` and the requested `P_2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_design_suppress_p0(
    w0: f64,
    p2: f64,
    out: *mut *mut OamPancake,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match design_suppress_p0(w0, p2) {
        Ok(p) => pancake_out(p, out),
        Err(e) => fail(e),
    }
}

/// Two-vortex design with `P_1 = 0` and the requested `P_2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_design_suppress_p1(
    w0: f64,
    p2: f64,
    out: *mut *mut OamPancake,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match design_suppress_p1(w0, p2) {
        Ok(p) => pancake_out(p, out),
        Err(e) => fail(e),
    }
}

/// Asymptotic `P_2 -> 0` design with the far vortex at `rho2_cut`
/// (at least `10 w0`). The achieved `P_2` leak is written to
/// `achieved_p2_out` when non-NULL.
///
/// # Safety
/// `out` must be writable; `achieved_p2_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn oam_design_suppress_p2(
    w0: f64,
    p1: f64,
    rho2_cut: f64,
    out: *mut *mut OamPancake,
    achieved_p2_out: *mut f64,
) -> OamStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match design_suppress_p2(w0, p1, rho2_cut) {
        Ok(d) => {
            if !achieved_p2_out.is_null() {
                *achieved_p2_out = d.achieved.p(2);
            }
            pancake_out(d.pancake, out)
        }
        Err(e) => fail(e),
    }
}

/// Runs the multistart inverse solver on a target JSON document
/// `{"N":..., "tolerance":..., "weights":{"0":...}}` and returns the result
/// as JSON (release with `oam_string_free`). A result is returned even when
/// the residual misses the tolerance; check its `converged` flag.
///
/// # Safety
/// `target_json` must be NUL-terminated; `result_json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn oam_design_general_json(
    target_json: *const c_char,
    starts: size_t,
    seed: u64,
    max_iter: size_t,
    result_json_out: *mut *mut c_char,
) -> OamStatus {
    if result_json_out.is_null() {
        return fail_null("result_json_out");
    }
    let text = match read_str(target_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let target = match io::target_from_json(text) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    match design_general(&target, starts, seed, max_iter) {
        Ok(result) => string_out(io::design_result_to_json(&result), result_json_out),
        Err(e) => fail(e),
    }
}
