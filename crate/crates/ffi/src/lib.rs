//! C interface to the `symspin` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a `SymspinStatus`; on failure `symspin_last_error` returns a
//! message for the calling thread. Strings returned through `char **` out
//! parameters are owned by the caller and must be released with
//! `symspin_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use symspin::error::Error;
use symspin::fock::{clifford_apply, FockModel, Spinor, SpinorJson};
use symspin::killing::{
    candidate_spectrum, flat_rigidity, isotropic_sigma, sphere_nonexistence, Certificate, CertificateKind,
    FlatRigidityOptions, SphereOptions,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymspinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ModelError = 3,
    NumericalError = 4,
    IoError = 5,
    Panic = 6,
}

/// Truncated Fock model.
pub struct SymspinModel(FockModel);

/// Spinor in a truncated Fock model.
pub struct SymspinSpinor(Spinor);

/// Killing spinor certificate.
pub struct SymspinCertificate(Certificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SymspinStatus {
    match e {
        Error::Numerical(_) => SymspinStatus::NumericalError,
        Error::Io(_) => SymspinStatus::IoError,
        Error::Config(_) | Error::GridTooSmall(_) | Error::InvalidChart(_) => SymspinStatus::InvalidArgument,
        _ => SymspinStatus::ModelError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SymspinStatus, String)>) -> SymspinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SymspinStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SymspinStatus::Panic
        }
    }
}

fn lib<T>(r: symspin::error::Result<T>) -> Result<T, (SymspinStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SymspinStatus, String) {
    (SymspinStatus::NullPointer, format!("{what} is null"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (SymspinStatus, String)> {
    let c = CString::new(s).map_err(|_| (SymspinStatus::InvalidArgument, "string contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SymspinStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SymspinStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn symspin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn symspin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn symspin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a model with half-dimension `l` and `cutoff` levels per mode.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symspin_model_new(l: usize, cutoff: usize, out: *mut *mut SymspinModel) -> SymspinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, SymspinModel(lib(FockModel::new(l, cutoff))?));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `symspin_model_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn symspin_model_free(model: *mut SymspinModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of basis spinors, `cutoff^l`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn symspin_model_dim(model: *const SymspinModel, out: *mut usize) -> SymspinStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.0.dim();
        Ok(())
    })
}

/// Hermite basis spinor with the given per-mode levels (`len` must equal `l`).
///
/// # Safety
/// `levels` must point to `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_spinor_basis(
    model: *const SymspinModel,
    levels: *const usize,
    len: usize,
    out: *mut *mut SymspinSpinor,
) -> SymspinStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if levels.is_null() || out.is_null() {
            return Err(null("levels or out"));
        }
        let lv = std::slice::from_raw_parts(levels, len);
        put(out, SymspinSpinor(lib(m.0.basis(lv))?));
        Ok(())
    })
}

/// Parses `{l, cutoff, coeffs: [[re, im], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_spinor_from_json(json: *const c_char, out: *mut *mut SymspinSpinor) -> SymspinStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let parsed: SpinorJson =
            serde_json::from_str(text).map_err(|e| (SymspinStatus::InvalidArgument, e.to_string()))?;
        put(out, SymspinSpinor(lib(Spinor::from_json(&parsed))?));
        Ok(())
    })
}

/// Serializes a spinor; release the result with `symspin_string_free`.
///
/// # Safety
/// `spinor` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn symspin_spinor_to_json(spinor: *const SymspinSpinor, out: *mut *mut c_char) -> SymspinStatus {
    guard(|| {
        let s = spinor.as_ref().ok_or_else(|| null("spinor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&s.0.to_json()).map_err(|e| (SymspinStatus::ModelError, e.to_string()))?;
        put_string(out, text)
    })
}

/// Copies the coefficients as interleaved `re, im` pairs into `buf`, which
/// must hold `2 * dim` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symspin_spinor_coeffs(
    spinor: *const SymspinSpinor,
    buf: *mut f64,
    len: usize,
) -> SymspinStatus {
    guard(|| {
        let s = spinor.as_ref().ok_or_else(|| null("spinor"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = 2 * s.0.coeffs.len();
        if len < need {
            return Err((
                SymspinStatus::InvalidArgument,
                format!("buffer holds {len} doubles, need {need}"),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (i, c) in s.0.coeffs.iter().enumerate() {
            out[2 * i] = c.re;
            out[2 * i + 1] = c.im;
        }
        Ok(())
    })
}

/// Clifford multiplication by the vector with `len = 2l` frame coefficients.
///
/// # Safety
/// `vector` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_clifford_apply(
    spinor: *const SymspinSpinor,
    vector: *const f64,
    len: usize,
    out: *mut *mut SymspinSpinor,
) -> SymspinStatus {
    guard(|| {
        let s = spinor.as_ref().ok_or_else(|| null("spinor"))?;
        if vector.is_null() || out.is_null() {
            return Err(null("vector or out"));
        }
        let v = std::slice::from_raw_parts(vector, len);
        put(out, SymspinSpinor(lib(clifford_apply(&s.0, v))?));
        Ok(())
    })
}

/// # Safety
/// `spinor` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn symspin_spinor_free(spinor: *mut SymspinSpinor) {
    if !spinor.is_null() {
        drop(Box::from_raw(spinor));
    }
}

/// Sphere Killing numbers for `σ = (1/r) I` as a JSON array.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_sphere_spectrum_json(
    radius: f64,
    count: usize,
    cutoff: usize,
    out: *mut *mut c_char,
) -> SymspinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err((SymspinStatus::InvalidArgument, format!("radius {radius}")));
        }
        let model = lib(FockModel::new(1, cutoff))?;
        let sigma = lib(isotropic_sigma(1, 1.0 / radius, 1))?;
        let c = lib(candidate_spectrum(&sigma, model, count))?;
        put_string(
            out,
            serde_json::to_string(&c).map_err(|e| (SymspinStatus::ModelError, e.to_string()))?,
        )
    })
}

/// Flat-space rigidity certificate.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_killing_flat(
    l: usize,
    cutoff: usize,
    nodes_per_axis: usize,
    out: *mut *mut SymspinCertificate,
) -> SymspinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = FlatRigidityOptions {
            l,
            cutoff,
            nodes_per_axis,
            ..FlatRigidityOptions::default()
        };
        put(out, SymspinCertificate(lib(flat_rigidity(&opts))?));
        Ok(())
    })
}

/// Round-sphere nonexistence certificate.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_killing_sphere(
    radius: f64,
    n_max: usize,
    theta_nodes: usize,
    fourier_modes: usize,
    out: *mut *mut SymspinCertificate,
) -> SymspinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = SphereOptions {
            radius,
            n_max,
            theta_nodes,
            fourier_modes,
            ..SphereOptions::default()
        };
        put(out, SymspinCertificate(lib(sphere_nonexistence(&opts))?));
        Ok(())
    })
}

/// Certificate kind: 0 existence, 1 nonexistence, 2 rigidity.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_certificate_kind(cert: *const SymspinCertificate, out: *mut i32) -> SymspinStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match c.0.kind {
            CertificateKind::Existence => 0,
            CertificateKind::Nonexistence => 1,
            CertificateKind::Rigidity => 2,
        };
        Ok(())
    })
}

/// Bound and verdict of a certificate.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_certificate_verdict(
    cert: *const SymspinCertificate,
    bound: *mut f64,
    verdict: *mut bool,
) -> SymspinStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        if bound.is_null() || verdict.is_null() {
            return Err(null("bound or verdict"));
        }
        *bound = c.0.bound;
        *verdict = c.0.verdict;
        Ok(())
    })
}

/// Certificate as JSON; release with `symspin_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn symspin_certificate_to_json(
    cert: *const SymspinCertificate,
    out: *mut *mut c_char,
) -> SymspinStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, c.0.to_json())
    })
}

/// # Safety
/// `cert` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn symspin_certificate_free(cert: *mut SymspinCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}
