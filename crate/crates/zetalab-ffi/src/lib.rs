//! C ABI for the zetalab library: opaque handles, integer status codes, and
//! a thread-local last-error message. The header include/zetalab.h is
//! regenerated by cbindgen at build time.
//!
//! Conventions: every constructor writes through an out-pointer and returns
//! a ZlStatus; handles are freed with the matching *_free function; strings
//! returned by the library are freed with zl_string_free.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use zetalab::curve::{zeta_from_counts, CurveZeta};
use zetalab::field::{FieldSpec, UniPoly};
use zetalab::lfun::{validate_lfunction, LFunction, Mode};
use zetalab::qpoly::{parse_rat, rat_to_f64};
use zetalab::surface::{ell_lfunction, EllipticSurface, Place};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A hard mathematical check failed (Riemann hypothesis, functional
    /// equation, overdetermination).
    ValidationFailed = 3,
    BufferTooSmall = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// The last error message from this thread, as a fresh allocation, or NULL
/// when no error has been recorded. Free with zl_string_free.
#[no_mangle]
pub extern "C" fn zl_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Free a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a zetalab-ffi function and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque validated L-function handle.
pub struct ZlLFunction {
    inner: LFunction,
}

/// Opaque curve zeta handle.
pub struct ZlCurveZeta {
    inner: CurveZeta,
}

unsafe fn parse_cstr(s: *const c_char) -> Result<String, ZlStatus> {
    if s.is_null() {
        set_error("null string argument".into());
        return Err(ZlStatus::NullPointer);
    }
    match CStr::from_ptr(s).to_str() {
        Ok(v) => Ok(v.to_owned()),
        Err(_) => {
            set_error("argument is not valid UTF-8".into());
            Err(ZlStatus::InvalidArgument)
        }
    }
}

/// Validate an L-function from comma-separated rational coefficients
/// ("1,0,2" or "1,1/2,..."), constant term first. On success writes a new
/// handle to `out`.
///
/// # Safety
/// `coeffs` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_new(
    q: u64,
    w: u32,
    coeffs: *const c_char,
    exact: bool,
    out: *mut *mut ZlLFunction,
) -> ZlStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return ZlStatus::NullPointer;
    }
    let text = match parse_cstr(coeffs) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let mut parsed = Vec::new();
    for part in text.split(',') {
        match parse_rat(part) {
            Some(r) => parsed.push(r),
            None => {
                set_error(format!("cannot parse coefficient {part:?} as a rational"));
                return ZlStatus::InvalidArgument;
            }
        }
    }
    let mode = if exact { Mode::Exact } else { Mode::default() };
    match validate_lfunction(q, w, parsed, mode) {
        Ok(lf) => {
            *out = Box::into_raw(Box::new(ZlLFunction { inner: lf }));
            ZlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            ZlStatus::ValidationFailed
        }
    }
}

/// # Safety
/// `p` must be a handle from zl_lfunction_new, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_free(p: *mut ZlLFunction) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_degree(p: *const ZlLFunction) -> u64 {
    if p.is_null() {
        return 0;
    }
    (*p).inner.degree() as u64
}

/// The root number, +1 or -1 (0 for a null handle).
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_root_number(p: *const ZlLFunction) -> i32 {
    if p.is_null() {
        return 0;
    }
    (*p).inner.root_number() as i32
}

/// Dirichlet coefficients Lambda_1..Lambda_n as doubles into `out`.
///
/// # Safety
/// `p` must be a live handle and `out` must point to at least `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_lambdas(
    p: *const ZlLFunction,
    n: usize,
    out: *mut f64,
) -> ZlStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer".into());
        return ZlStatus::NullPointer;
    }
    let lam = (*p).inner.lambda_coeffs(n);
    for (i, v) in lam.values.iter().enumerate() {
        *out.add(i) = rat_to_f64(v);
    }
    ZlStatus::Ok
}

/// Root angles (theta in (-pi, pi]) and multiplicities. Writes min(cap,
/// count) entries and stores the distinct-root count in `written`; returns
/// BufferTooSmall when cap was insufficient.
///
/// # Safety
/// `p` must be a live handle; `theta` and `mult` must hold `cap` entries;
/// `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zl_lfunction_roots(
    p: *const ZlLFunction,
    theta: *mut f64,
    mult: *mut u32,
    cap: usize,
    written: *mut usize,
) -> ZlStatus {
    if p.is_null() || theta.is_null() || mult.is_null() || written.is_null() {
        set_error("null pointer".into());
        return ZlStatus::NullPointer;
    }
    let roots = (*p).inner.roots();
    *written = roots.len();
    for (i, r) in roots.iter().take(cap).enumerate() {
        *theta.add(i) = r.theta;
        *mult.add(i) = r.multiplicity as u32;
    }
    if roots.len() > cap {
        set_error(format!("{} roots, capacity {cap}", roots.len()));
        return ZlStatus::BufferTooSmall;
    }
    ZlStatus::Ok
}

/// Reconstruct a curve zeta function from point counts N_1..N_g.
///
/// # Safety
/// `counts` must point to `genus` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn zl_curve_zeta_from_counts(
    q: u64,
    genus: usize,
    counts: *const u64,
    out: *mut *mut ZlCurveZeta,
) -> ZlStatus {
    if out.is_null() || (genus > 0 && counts.is_null()) {
        set_error("null pointer".into());
        return ZlStatus::NullPointer;
    }
    let ns: Vec<u64> = (0..genus).map(|i| *counts.add(i)).collect();
    match zeta_from_counts(q, genus, &ns, Mode::Exact) {
        Ok(z) => {
            *out = Box::into_raw(Box::new(ZlCurveZeta { inner: z }));
            ZlStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            ZlStatus::ValidationFailed
        }
    }
}

/// # Safety
/// `p` must be a handle from zl_curve_zeta_from_counts, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_curve_zeta_free(p: *mut ZlCurveZeta) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// The class number h = P(1) as a decimal string; free with zl_string_free.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn zl_curve_zeta_h(p: *const ZlCurveZeta) -> *mut c_char {
    if p.is_null() {
        return ptr::null_mut();
    }
    CString::new((*p).inner.h.to_string()).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Euler-Kronecker constants gamma^0..gamma^K into `out` (n = K+1 <= 9).
///
/// # Safety
/// `p` must be a live handle; `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn zl_curve_zeta_gammas(
    p: *const ZlCurveZeta,
    n: usize,
    out: *mut f64,
) -> ZlStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer".into());
        return ZlStatus::NullPointer;
    }
    let g = &(*p).inner.gammas;
    if n > g.len() {
        set_error(format!("{} gammas cached, {n} requested", g.len()));
        return ZlStatus::BufferTooSmall;
    }
    for i in 0..n {
        *out.add(i) = g[i];
    }
    ZlStatus::Ok
}

/// L-function of the elliptic surface y^2 = x^3 + A(t)x + B(t) over F_{p^e}(t),
/// with A, B as comma-separated coefficient lists (element indices, constant
/// first). Returns a JSON string (n_E, degree, coeffs, omega, lambdas,
/// places), or NULL with the error recorded; free with zl_string_free.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn zl_ell_lfunction_json(
    p: u64,
    e: u32,
    a: *const c_char,
    b: *const c_char,
) -> *mut c_char {
    let parse = |s: *const c_char| -> Result<String, ZlStatus> { parse_cstr(s) };
    let (a_text, b_text) = match (parse(a), parse(b)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return ptr::null_mut(),
    };
    let field = match FieldSpec::new(p, e) {
        Ok(f) => f,
        Err(err) => {
            set_error(err.to_string());
            return ptr::null_mut();
        }
    };
    let to_poly = |text: &str| -> Result<UniPoly, String> {
        let mut coeffs = Vec::new();
        for part in text.split(',') {
            let v: i64 = part.trim().parse().map_err(|e| format!("coefficient {part:?}: {e}"))?;
            coeffs.push(field.from_index(v.rem_euclid(field.q as i64) as u64));
        }
        Ok(UniPoly::new(&field, coeffs))
    };
    let (ap, bp) = match (to_poly(&a_text), to_poly(&b_text)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            set_error(e);
            return ptr::null_mut();
        }
    };
    let surface = match EllipticSurface::new(field.clone(), ap, bp) {
        Ok(s) => s,
        Err(err) => {
            set_error(err.to_string());
            return ptr::null_mut();
        }
    };
    let data = match ell_lfunction(&surface) {
        Ok(d) => d,
        Err(err) => {
            set_error(err.to_string());
            return ptr::null_mut();
        }
    };
    let places: Vec<serde_json::Value> = data
        .bad_places
        .iter()
        .map(|r| {
            let place = match &r.place {
                Place::Finite(pi) => serde_json::json!(pi
                    .coeffs
                    .iter()
                    .map(|c| field.index(c))
                    .collect::<Vec<_>>()),
                Place::Infinity => serde_json::json!("infinity"),
            };
            serde_json::json!({
                "place": place,
                "degree": r.degree,
                "type": r.reduction.as_str(),
                "a_v": r.a_v,
            })
        })
        .collect();
    let json = serde_json::json!({
        "n_E": data.n_e,
        "degree": data.lfun.degree(),
        "coeffs": data.lfun.coeffs().iter().map(zetalab::qpoly::format_rat).collect::<Vec<_>>(),
        "omega": data.omega,
        "lambdas": data.lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "places": places,
    });
    CString::new(json.to_string()).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn lfunction_roundtrip_through_ffi() {
        let coeffs = CString::new("1,0,2").unwrap();
        let mut handle: *mut ZlLFunction = ptr::null_mut();
        let status = unsafe { zl_lfunction_new(2, 1, coeffs.as_ptr(), true, &mut handle) };
        assert_eq!(status, ZlStatus::Ok);
        unsafe {
            assert_eq!(zl_lfunction_degree(handle), 2);
            assert_eq!(zl_lfunction_root_number(handle), 1);
            let mut lam = [0.0f64; 2];
            assert_eq!(zl_lfunction_lambdas(handle, 2, lam.as_mut_ptr()), ZlStatus::Ok);
            assert_eq!(lam, [0.0, 4.0]);
            let mut theta = [0.0f64; 4];
            let mut mult = [0u32; 4];
            let mut written = 0usize;
            assert_eq!(
                zl_lfunction_roots(handle, theta.as_mut_ptr(), mult.as_mut_ptr(), 4, &mut written),
                ZlStatus::Ok
            );
            assert_eq!(written, 2);
            assert!((theta[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
            zl_lfunction_free(handle);
        }
    }

    #[test]
    fn invalid_lfunction_sets_error() {
        let coeffs = CString::new("1,3").unwrap();
        let mut handle: *mut ZlLFunction = ptr::null_mut();
        let status = unsafe { zl_lfunction_new(2, 1, coeffs.as_ptr(), false, &mut handle) };
        assert_eq!(status, ZlStatus::ValidationFailed);
        let msg = zl_last_error_message();
        assert!(!msg.is_null());
        let text = unsafe { CStr::from_ptr(msg) }.to_str().unwrap().to_owned();
        assert!(text.contains("Riemann"), "{text}");
        unsafe { zl_string_free(msg) };
    }

    #[test]
    fn curve_zeta_through_ffi() {
        let counts = [4u64];
        let mut handle: *mut ZlCurveZeta = ptr::null_mut();
        let status = unsafe { zl_curve_zeta_from_counts(3, 1, counts.as_ptr(), &mut handle) };
        assert_eq!(status, ZlStatus::Ok);
        unsafe {
            let h = zl_curve_zeta_h(handle);
            assert_eq!(CStr::from_ptr(h).to_str().unwrap(), "4");
            zl_string_free(h);
            let mut g = [0.0f64; 2];
            assert_eq!(zl_curve_zeta_gammas(handle, 2, g.as_mut_ptr()), ZlStatus::Ok);
            assert!(g[0].is_finite());
            zl_curve_zeta_free(handle);
        }
    }

    #[test]
    fn ell_lfunction_json_through_ffi() {
        let a = CString::new("0,1").unwrap();
        let b = CString::new("1").unwrap();
        let out = unsafe { zl_ell_lfunction_json(5, 1, a.as_ptr(), b.as_ptr()) };
        assert!(!out.is_null());
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
        unsafe { zl_string_free(out) };
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n_E"], 5);
        assert_eq!(v["degree"], 1);
        assert_eq!(v["omega"], -1);
        // char 2 is rejected through the same path
        let bad = unsafe { zl_ell_lfunction_json(2, 1, a.as_ptr(), b.as_ptr()) };
        assert!(bad.is_null());
    }
}
