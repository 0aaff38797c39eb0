//! C interface to `wclmmse`.
//!
//! Models and filters are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`WclStatus`]; on failure a message is kept per thread and can be read
//! with [`wcl_last_error_message`]. Matrices cross the boundary as row-major
//! `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wclmmse::diagnostics::analytic_mse;
use wclmmse::filters::{self, FilterKind, LinearFilter, SpectralCache};
use wclmmse::linalg::condition_number;
use wclmmse::model::{synthetic_model, CovarianceModel, Spectrum};
use wclmmse::{Error, Mat};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Singular = 4,
    Rank = 5,
    NonFinite = 6,
    Io = 7,
    Panic = 8,
}

/// Filter families accepted by [`wcl_filter_build`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WclFilterKind {
    Wiener = 0,
    Lrw = 1,
    Csw = 2,
    Jpc = 3,
    Lsjpc = 4,
    JpcSimplified = 5,
    LsjpcSimplified = 6,
}

fn filter_kind(code: i32) -> Option<FilterKind> {
    Some(match code {
        0 => FilterKind::Wiener,
        1 => FilterKind::Lrw,
        2 => FilterKind::Csw,
        3 => FilterKind::Jpc,
        4 => FilterKind::Lsjpc,
        5 => FilterKind::JpcSimplified,
        6 => FilterKind::LsjpcSimplified,
        _ => return None,
    })
}

/// Opaque joint covariance model.
pub struct WclModel {
    inner: CovarianceModel,
}

/// Opaque filter matrix with its construction metadata.
pub struct WclFilter {
    inner: LinearFilter,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WclStatus {
    match e {
        Error::Dimension(_) => WclStatus::Dimension,
        Error::Singular { .. } | Error::UndefinedCondition => WclStatus::Singular,
        Error::Rank { .. } => WclStatus::Rank,
        Error::NonFinite(_) => WclStatus::NonFinite,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => WclStatus::Io,
        _ => WclStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics for [`wcl_last_error_message`].
fn guard<F: FnOnce() -> Result<(), (WclStatus, String)>>(f: F) -> WclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WclStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            WclStatus::Panic
        }
    }
}

fn lib<T>(r: wclmmse::Result<T>) -> Result<T, (WclStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (WclStatus, String) {
    (WclStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(p: *const WclModel) -> Result<&'a CovarianceModel, (WclStatus, String)> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn filter_ref<'a>(p: *const WclFilter) -> Result<&'a LinearFilter, (WclStatus, String)> {
    p.as_ref().map(|f| &f.inner).ok_or_else(|| null("filter"))
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), (WclStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wcl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Synthetic model with geometric spectrum `a·r^i` and a seeded random basis.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_synthetic(
    n: usize,
    m: usize,
    a: f64,
    r: f64,
    seed: u64,
    out: *mut *mut WclModel,
) -> WclStatus {
    guard(|| {
        let inner = lib(synthetic_model(n, m, &Spectrum::Geometric { a, r }, seed))?;
        put(out, WclModel { inner })
    })
}

/// Model from a `(n+m)×(n+m)` row-major joint covariance with X in the
/// first `n` coordinates.
///
/// # Safety
/// `c_z` must point to `dim*dim` readable doubles and `out` to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_from_joint(
    c_z: *const f64,
    dim: usize,
    n: usize,
    out: *mut *mut WclModel,
) -> WclStatus {
    guard(|| {
        if c_z.is_null() {
            return Err(null("c_z"));
        }
        let len = dim.checked_mul(dim).ok_or((WclStatus::InvalidArgument, "dimension overflow".into()))?;
        let data = std::slice::from_raw_parts(c_z, len);
        let inner = lib(CovarianceModel::from_joint(Mat::from_row_slice(dim, dim, data), n))?;
        put(out, WclModel { inner })
    })
}

/// Loads a model file written by the `wclmmse synth` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_load(path: *const c_char, out: *mut *mut WclModel) -> WclStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (WclStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let inner = lib(CovarianceModel::load(Path::new(path)))?;
        put(out, WclModel { inner })
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_free(model: *mut WclModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Output dimension N, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_n(model: *const WclModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.n())
}

/// Input dimension M, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_model_m(model: *const WclModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.m())
}

/// Condition number of the input covariance.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wcl_condition_number(model: *const WclModel, out: *mut f64) -> WclStatus {
    guard(|| {
        let model = model_ref(model)?;
        let c = lib(condition_number(model.c_y()))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = c;
        Ok(())
    })
}

/// Builds a filter of kind `kind` (a [`WclFilterKind`] value). `l` is
/// ignored for Wiener.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_build(
    model: *const WclModel,
    kind: i32,
    l: usize,
    out: *mut *mut WclFilter,
) -> WclStatus {
    guard(|| {
        let model = model_ref(model)?;
        let kind = filter_kind(kind).ok_or((WclStatus::InvalidArgument, format!("unknown filter kind {kind}")))?;
        let inner = if kind == FilterKind::Wiener {
            lib(filters::wiener(model))?
        } else {
            let cache = lib(SpectralCache::new(model))?;
            lib(filters::build(kind, &cache, model, l))?
        };
        put(out, WclFilter { inner })
    })
}

/// # Safety
/// `filter` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_free(filter: *mut WclFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}

/// Filter rows (N), or 0 for NULL.
///
/// # Safety
/// `filter` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_rows(filter: *const WclFilter) -> usize {
    filter.as_ref().map_or(0, |f| f.inner.n())
}

/// Filter columns (M), or 0 for NULL.
///
/// # Safety
/// `filter` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_cols(filter: *const WclFilter) -> usize {
    filter.as_ref().map_or(0, |f| f.inner.m())
}

/// Largest linear system solved while building the filter.
///
/// # Safety
/// `filter` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_max_inverse_dim(filter: *const WclFilter) -> usize {
    filter.as_ref().map_or(0, |f| f.inner.max_inverse_dim)
}

/// Copies the filter matrix row-major into `out`, which holds `len` doubles.
///
/// # Safety
/// `filter` must be a live handle and `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn wcl_filter_copy_matrix(filter: *const WclFilter, out: *mut f64, len: usize) -> WclStatus {
    guard(|| {
        let f = filter_ref(filter)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let (rows, cols) = f.matrix.shape();
        if len < rows * cols {
            return Err((
                WclStatus::Dimension,
                format!("buffer holds {len} values, filter has {}", rows * cols),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                dst[i * cols + j] = f.matrix[(i, j)];
            }
        }
        Ok(())
    })
}

/// Mean squared error of `filter` under `model`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wcl_analytic_mse(model: *const WclModel, filter: *const WclFilter, out: *mut f64) -> WclStatus {
    guard(|| {
        let v = lib(analytic_mse(model_ref(model)?, filter_ref(filter)?))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = v;
        Ok(())
    })
}
