//! C ABI over the lemlab core: opaque handles, status codes, and a
//! thread-local last-error message.
//!
//! Ownership rules: every `*_new`/`*_sample`/`*_solve` constructor hands the
//! caller an opaque pointer that must go back through the matching `*_free`.
//! Output buffers are caller-allocated; capacities are checked.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::OnceLock;

use num_complex::Complex64;

use lemlab::critical::{solve_critical_points, CriticalSet, SolveOptions};
use lemlab::ensembles::{sample_polynomial, EnsembleFamily, EnsembleSpec, SeedPolicy};
use lemlab::error::Error;
use lemlab::poly::RootedPolynomial;
use lemlab::potential::{cauchy_transform, potential_circle, potential_disk};
use lemlab::render::{extract_contours, render_svg, Overlays};
use lemlab::topology::{count_components_exact, count_components_grid, count_isolated};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    BufferTooSmall = 4,
    IoError = 5,
}

/// Opaque handle to a root-form polynomial.
pub struct LemlabPolynomial(RootedPolynomial);

/// Opaque handle to a solved critical set.
pub struct LemlabCriticalSet(CriticalSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(err: &Error) -> LemlabStatus {
    let msg = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
    if err.is_numerical() {
        LemlabStatus::NumericalFailure
    } else if matches!(err, Error::Io(_)) {
        LemlabStatus::IoError
    } else {
        LemlabStatus::InvalidInput
    }
}

fn set_message(msg: &str, status: LemlabStatus) -> LemlabStatus {
    let msg = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
    status
}

/// Message for the most recent failure on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lemlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|msg| msg.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn lemlab_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).unwrap())
        .as_ptr()
}

/// Root-sampling law selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemlabFamily {
    UniformDisk = 0,
    UniformCircle = 1,
}

impl From<LemlabFamily> for EnsembleFamily {
    fn from(f: LemlabFamily) -> Self {
        match f {
            LemlabFamily::UniformDisk => EnsembleFamily::UniformDisk,
            LemlabFamily::UniformCircle => EnsembleFamily::UniformCircle,
        }
    }
}

/// Build a polynomial from parallel arrays of root coordinates.
///
/// # Safety
/// `re` and `im` must point to `len` readable doubles; `out` must be a valid
/// location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_from_roots(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut LemlabPolynomial,
) -> LemlabStatus {
    if re.is_null() || im.is_null() || out.is_null() {
        return set_message("null pointer argument", LemlabStatus::NullPointer);
    }
    let res = std::slice::from_raw_parts(re, len);
    let ims = std::slice::from_raw_parts(im, len);
    let roots: Vec<Complex64> = res
        .iter()
        .zip(ims)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    match RootedPolynomial::new(roots) {
        Ok(poly) => {
            *out = Box::into_raw(Box::new(LemlabPolynomial(poly)));
            LemlabStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// Sample a polynomial with i.i.d. roots from the chosen ensemble.
///
/// # Safety
/// `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_sample(
    family: LemlabFamily,
    r: f64,
    n: usize,
    master_seed: u64,
    trial_index: u64,
    out: *mut *mut LemlabPolynomial,
) -> LemlabStatus {
    if out.is_null() {
        return set_message("null pointer argument", LemlabStatus::NullPointer);
    }
    let spec = match EnsembleSpec::new(family.into(), r, n) {
        Ok(spec) => spec,
        Err(err) => return set_error(&err),
    };
    let poly = sample_polynomial(&spec, &SeedPolicy::new(master_seed, trial_index));
    *out = Box::into_raw(Box::new(LemlabPolynomial(poly)));
    LemlabStatus::Ok
}

/// # Safety
/// `poly` must come from a lemlab constructor and not already be freed.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_free(poly: *mut LemlabPolynomial) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Degree (root count). Zero on a null handle.
///
/// # Safety
/// `poly` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_degree(poly: *const LemlabPolynomial) -> usize {
    poly.as_ref().map(|p| p.0.degree()).unwrap_or(0)
}

/// Copy root coordinates into caller buffers of capacity `cap`.
///
/// # Safety
/// `out_re`/`out_im` must hold at least `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_roots(
    poly: *const LemlabPolynomial,
    out_re: *mut f64,
    out_im: *mut f64,
    cap: usize,
) -> LemlabStatus {
    let Some(poly) = poly.as_ref() else {
        return set_message("null polynomial handle", LemlabStatus::NullPointer);
    };
    if out_re.is_null() || out_im.is_null() {
        return set_message("null output buffer", LemlabStatus::NullPointer);
    }
    let n = poly.0.degree();
    if cap < n {
        return set_message("output buffer too small", LemlabStatus::BufferTooSmall);
    }
    let res = std::slice::from_raw_parts_mut(out_re, n);
    let ims = std::slice::from_raw_parts_mut(out_im, n);
    for (i, root) in poly.0.roots().iter().enumerate() {
        res[i] = root.re;
        ims[i] = root.im;
    }
    LemlabStatus::Ok
}

/// log|P(z)|; -inf when z is a root bit-for-bit, NaN on a null handle.
///
/// # Safety
/// `poly` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lemlab_poly_log_abs(
    poly: *const LemlabPolynomial,
    re: f64,
    im: f64,
) -> f64 {
    poly.as_ref()
        .map(|p| p.0.log_abs_eval(Complex64::new(re, im)).log_abs)
        .unwrap_or(f64::NAN)
}

/// Solve all n-1 critical points.
///
/// # Safety
/// `poly` must be a live handle; `out` a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lemlab_critical_solve(
    poly: *const LemlabPolynomial,
    out: *mut *mut LemlabCriticalSet,
) -> LemlabStatus {
    let Some(poly) = poly.as_ref() else {
        return set_message("null polynomial handle", LemlabStatus::NullPointer);
    };
    if out.is_null() {
        return set_message("null pointer argument", LemlabStatus::NullPointer);
    }
    match solve_critical_points(&poly.0, &SolveOptions::default()) {
        Ok(cps) => {
            *out = Box::into_raw(Box::new(LemlabCriticalSet(cps)));
            LemlabStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// # Safety
/// `cps` must come from `lemlab_critical_solve` and not already be freed.
#[no_mangle]
pub unsafe extern "C" fn lemlab_critical_free(cps: *mut LemlabCriticalSet) {
    if !cps.is_null() {
        drop(Box::from_raw(cps));
    }
}

/// Number of critical points in the set.
///
/// # Safety
/// `cps` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lemlab_critical_count(cps: *const LemlabCriticalSet) -> usize {
    cps.as_ref().map(|c| c.0.len()).unwrap_or(0)
}

/// Copy critical-point coordinates into caller buffers of capacity `cap`.
///
/// # Safety
/// `out_re`/`out_im` must hold at least `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn lemlab_critical_points(
    cps: *const LemlabCriticalSet,
    out_re: *mut f64,
    out_im: *mut f64,
    cap: usize,
) -> LemlabStatus {
    let Some(cps) = cps.as_ref() else {
        return set_message("null critical-set handle", LemlabStatus::NullPointer);
    };
    if out_re.is_null() || out_im.is_null() {
        return set_message("null output buffer", LemlabStatus::NullPointer);
    }
    let m = cps.0.len();
    if cap < m {
        return set_message("output buffer too small", LemlabStatus::BufferTooSmall);
    }
    let res = std::slice::from_raw_parts_mut(out_re, m);
    let ims = std::slice::from_raw_parts_mut(out_im, m);
    for (i, b) in cps.0.points.iter().enumerate() {
        res[i] = b.re;
        ims[i] = b.im;
    }
    LemlabStatus::Ok
}

/// Exact component count through the critical values.
///
/// # Safety
/// All handles live; `out_count`/`out_degenerate` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn lemlab_count_exact(
    poly: *const LemlabPolynomial,
    cps: *const LemlabCriticalSet,
    tol: f64,
    out_count: *mut usize,
    out_degenerate: *mut bool,
) -> LemlabStatus {
    let (Some(poly), Some(cps)) = (poly.as_ref(), cps.as_ref()) else {
        return set_message("null handle", LemlabStatus::NullPointer);
    };
    if out_count.is_null() || out_degenerate.is_null() {
        return set_message("null output pointer", LemlabStatus::NullPointer);
    }
    match count_components_exact(&poly.0, &cps.0, tol) {
        Ok(report) => {
            *out_count = report.count;
            *out_degenerate = report.degenerate;
            LemlabStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// Grid flood-fill component count with refinement up to
/// `target_resolution`.
///
/// # Safety
/// `poly` live; `out_count`/`out_unstable` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn lemlab_count_grid(
    poly: *const LemlabPolynomial,
    target_resolution: usize,
    out_count: *mut usize,
    out_unstable: *mut bool,
) -> LemlabStatus {
    let Some(poly) = poly.as_ref() else {
        return set_message("null polynomial handle", LemlabStatus::NullPointer);
    };
    if out_count.is_null() || out_unstable.is_null() {
        return set_message("null output pointer", LemlabStatus::NullPointer);
    }
    let report = count_components_grid(&poly.0, target_resolution);
    *out_count = report.count;
    *out_unstable = report.degenerate;
    LemlabStatus::Ok
}

/// Number of roots certified as isolated components at r = n^{-6}.
///
/// # Safety
/// `poly` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn lemlab_count_isolated(
    poly: *const LemlabPolynomial,
    out: *mut usize,
) -> LemlabStatus {
    let Some(poly) = poly.as_ref() else {
        return set_message("null polynomial handle", LemlabStatus::NullPointer);
    };
    if out.is_null() {
        return set_message("null output pointer", LemlabStatus::NullPointer);
    }
    match count_isolated(&poly.0) {
        Ok(count) => {
            *out = count;
            LemlabStatus::Ok
        }
        Err(err) => set_error(&err),
    }
}

/// Closed-form logarithmic potential of the (family, r) ensemble at z.
#[no_mangle]
pub extern "C" fn lemlab_potential(family: LemlabFamily, r: f64, re: f64, im: f64) -> f64 {
    let z = Complex64::new(re, im);
    match family {
        LemlabFamily::UniformDisk => potential_disk(z, r),
        LemlabFamily::UniformCircle => potential_circle(z, r),
    }
}

/// Cauchy transform of the (family, r) ensemble at z.
///
/// # Safety
/// `out_re`/`out_im` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn lemlab_cauchy_transform(
    family: LemlabFamily,
    r: f64,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LemlabStatus {
    if out_re.is_null() || out_im.is_null() {
        return set_message("null output pointer", LemlabStatus::NullPointer);
    }
    let spec = match EnsembleSpec::new(family.into(), r, 1) {
        Ok(spec) => spec,
        Err(err) => return set_error(&err),
    };
    let f = cauchy_transform(Complex64::new(re, im), &spec);
    *out_re = f.re;
    *out_im = f.im;
    LemlabStatus::Ok
}

/// Extract the lemniscate contours and write an SVG to `path`.
///
/// # Safety
/// `poly` live; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn lemlab_render_svg(
    poly: *const LemlabPolynomial,
    resolution: usize,
    path: *const c_char,
) -> LemlabStatus {
    let Some(poly) = poly.as_ref() else {
        return set_message("null polynomial handle", LemlabStatus::NullPointer);
    };
    if path.is_null() {
        return set_message("null path", LemlabStatus::NullPointer);
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return set_message("path is not valid UTF-8", LemlabStatus::InvalidInput);
    };
    let contours = match extract_contours(&poly.0, resolution) {
        Ok(contours) => contours,
        Err(err) => return set_error(&err),
    };
    let overlays = Overlays {
        roots: Some(poly.0.roots()),
        ..Default::default()
    };
    match render_svg(&contours, &overlays, std::path::Path::new(path)) {
        Ok(()) => LemlabStatus::Ok,
        Err(err) => set_error(&err),
    }
}
