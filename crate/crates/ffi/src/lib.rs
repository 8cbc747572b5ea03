//! C ABI over `kglab`.
//!
//! Objects are opaque handles created by `*_parse` and released by `*_free`.
//! Every call returns a [`KgStatus`]; on failure `kg_last_error` gives the
//! message for the calling thread. Strings returned through `char **` are
//! owned by the caller and released with `kg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kglab::arith::fixed::ratio_to_f64;
use kglab::arith::{sample_torus_point, RngStream};
use kglab::counting::{count_solutions, main_term, MainTermMode};
use kglab::gamma::IrrationalShift;
use kglab::lattice::LatticeVector;
use kglab::psi::ApproxFunction;
use kglab::report::ratio_string;
use kglab::torus::overlap_2d_values;
use kglab::variance::variance_full;
use kglab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    PrecisionRange = 3,
    RationalShift = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgMainTermMode {
    ExactShell = 0,
    Paper = 1,
}

/// Opaque irrational shift `γ`.
pub struct KgShift(IrrationalShift);

/// Opaque approximation function `ψ`.
pub struct KgPsi(ApproxFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> KgStatus {
    match e {
        Error::InvalidArgument(_) => KgStatus::InvalidArgument,
        Error::Parse(_) => KgStatus::Parse,
        Error::PrecisionRange(_) => KgStatus::PrecisionRange,
        Error::RationalShift(_) => KgStatus::RationalShift,
        Error::Io(_) => KgStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            KgStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            KgStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            KgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write_out<T>(p: *mut T, what: &'static str, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    p.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn kg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `sqrt:n`, `surd:a,b,r,d`, `cf:...` or `liouville:k`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kg_shift_parse(spec: *const c_char, out: *mut *mut KgShift) -> KgStatus {
    guard(|| {
        let s = IrrationalShift::parse(str_arg(spec, "spec")?)?;
        write_out(out, "out", Box::into_raw(Box::new(KgShift(s))))
    })
}

/// # Safety
/// `shift` must come from `kg_shift_parse`, or be null.
#[no_mangle]
pub unsafe extern "C" fn kg_shift_free(shift: *mut KgShift) {
    if !shift.is_null() {
        drop(Box::from_raw(shift));
    }
}

/// Parses `pow:c,a`, `const:v`, `table:PATH`, `clamp:SPEC` or `window:u,v:SPEC`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kg_psi_parse(spec: *const c_char, out: *mut *mut KgPsi) -> KgStatus {
    guard(|| {
        let p = ApproxFunction::parse(str_arg(spec, "spec")?)?;
        write_out(out, "out", Box::into_raw(Box::new(KgPsi(p))))
    })
}

/// # Safety
/// `psi` must come from `kg_psi_parse`, or be null.
#[no_mangle]
pub unsafe extern "C" fn kg_psi_free(psi: *mut KgPsi) {
    if !psi.is_null() {
        drop(Box::from_raw(psi));
    }
}

/// `N(α, Q, γ)` for the point `α` drawn by trial `trial` of `seed`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kg_count(
    shift: *const KgShift,
    psi: *const KgPsi,
    q_max: u64,
    seed: u64,
    trial: u64,
    scale_bits: u32,
    out: *mut u64,
) -> KgStatus {
    guard(|| {
        let g = &ref_arg(shift, "shift")?.0;
        let p = &ref_arg(psi, "psi")?.0;
        let alpha = sample_torus_point(&mut RngStream::for_trial(seed, trial), scale_bits)?;
        let n = count_solutions(&alpha, q_max, g, p)?;
        write_out(out, "out", n)
    })
}

/// Main term `Ψ(Q)`; `exact` receives the exact rational `p/q` when non-null.
///
/// # Safety
/// `psi` must be live; `out` must be writable; `exact` may be null.
#[no_mangle]
pub unsafe extern "C" fn kg_main_term(
    psi: *const KgPsi,
    q_max: u64,
    mode: KgMainTermMode,
    out: *mut f64,
    exact: *mut *mut c_char,
) -> KgStatus {
    guard(|| {
        let p = &ref_arg(psi, "psi")?.0;
        let m = match mode {
            KgMainTermMode::ExactShell => MainTermMode::ExactShell,
            KgMainTermMode::Paper => MainTermMode::Paper,
        };
        let v = main_term(p, q_max, m)?;
        write_out(out, "out", ratio_to_f64(&v))?;
        if !exact.is_null() {
            exact.write(owned_string(ratio_string(&v)));
        }
        Ok(())
    })
}

/// `λ₂(A_q ∩ A_r)` with `γ` truncated to `scale_bits`.
///
/// # Safety
/// Handles must be live; `out` must be writable; `exact` may be null.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn kg_overlap_2d(
    q1: i64,
    q2: i64,
    r1: i64,
    r2: i64,
    psi: *const KgPsi,
    shift: *const KgShift,
    scale_bits: u32,
    out: *mut f64,
    exact: *mut *mut c_char,
) -> KgStatus {
    guard(|| {
        let p = &ref_arg(psi, "psi")?.0;
        let g = &ref_arg(shift, "shift")?.0;
        let q = LatticeVector::new(q1, q2)?;
        let r = LatticeVector::new(r1, r2)?;
        let gamma = g.frac(scale_bits)?.to_ratio();
        let v = overlap_2d_values(&q, &r, &p.eval(q.norm())?, &p.eval(r.norm())?, &gamma)?;
        write_out(out, "out", ratio_to_f64(&v.value))?;
        if !exact.is_null() {
            exact.write(owned_string(ratio_string(&v.value)));
        }
        Ok(())
    })
}

/// Variance over the box `|q| ≤ Q`; `ratio` receives variance / Ψ (NaN when
/// Ψ = 0) and `json` the full report when non-null.
///
/// # Safety
/// Handles must be live; `ratio` must be writable; `json` may be null.
#[no_mangle]
pub unsafe extern "C" fn kg_variance(
    psi: *const KgPsi,
    shift: *const KgShift,
    q_max: u64,
    scale_bits: u32,
    ratio: *mut f64,
    json: *mut *mut c_char,
) -> KgStatus {
    guard(|| {
        let p = &ref_arg(psi, "psi")?.0;
        let g = &ref_arg(shift, "shift")?.0;
        let rep = variance_full(q_max, p, g, scale_bits)?;
        write_out(ratio, "ratio", rep.ratio_f64().unwrap_or(f64::NAN))?;
        if !json.is_null() {
            let text = serde_json::to_string(&rep).map_err(|e| Fail::Lib(Error::from(e)))?;
            json.write(owned_string(text));
        }
        Ok(())
    })
}
