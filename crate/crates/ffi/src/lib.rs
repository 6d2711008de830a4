//! C bindings for `ridgeprec`.
//!
//! Matrices cross the boundary as opaque [`RpMatrix`] handles built from
//! row-major `double` buffers. Every fallible function returns an
//! [`RpStatus`]; on failure [`rp_last_error_message`] describes the error
//! raised on the calling thread.
//!
//! # Safety
//!
//! Pointers passed in must be null or valid for the stated length. Handles
//! must come from this library and be released exactly once with the
//! matching `*_free` function. Output pointers must be writable.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use ridgeprec::cv::{self, CvConfig, CvScheme, EstimatorSpec, TargetSpec};
use ridgeprec::estimators::{self, EstimatorKind, RidgeEstimate, Target};
use ridgeprec::ggm;
use ridgeprec::io::SYMMETRY_TOL;
use ridgeprec::matrix::SymMatrix;
use ridgeprec::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    RpOk = 0,
    RpErrNullPointer = 1,
    RpErrInvalidArgument = 2,
    RpErrInvalidMatrix = 3,
    RpErrNotPositiveDefinite = 4,
    RpErrInvalidPenalty = 5,
    RpErrInvalidTarget = 6,
    RpErrInsufficientData = 7,
    RpErrNumeric = 8,
    RpErrPanic = 9,
}

pub const RP_ESTIMATOR_ARCHETYPE_1: u32 = 0;
pub const RP_ESTIMATOR_ARCHETYPE_2: u32 = 1;
pub const RP_ESTIMATOR_ALT_1: u32 = 2;
pub const RP_ESTIMATOR_ALT_2: u32 = 3;

pub const RP_TARGET_ZERO: u32 = 0;
pub const RP_TARGET_IDENTITY: u32 = 1;
/// `value · I`.
pub const RP_TARGET_SCALAR: u32 = 2;
/// Inverse diagonal of the sample covariance.
pub const RP_TARGET_DEFAULT_DIAGONAL: u32 = 3;
/// The matrix handle in `RpTarget::matrix`.
pub const RP_TARGET_MATRIX: u32 = 4;

pub const RP_SCHEME_KFOLD: u32 = 0;
pub const RP_SCHEME_LOOCV: u32 = 1;
pub const RP_SCHEME_APPROX_LOOCV: u32 = 2;

/// Precision-side target description.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpTarget {
    /// One of the `RP_TARGET_*` constants.
    pub kind: u32,
    /// Scalar for `RP_TARGET_SCALAR`, ignored otherwise.
    pub value: f64,
    /// Matrix for `RP_TARGET_MATRIX`, ignored otherwise.
    pub matrix: *const RpMatrix,
}

/// Opaque symmetric matrix.
pub struct RpMatrix {
    inner: SymMatrix,
}

/// Opaque fitted estimate.
pub struct RpEstimate {
    inner: RidgeEstimate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(RpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidMatrix(_) | Error::DimensionMismatch { .. } | Error::Parse(_) => RpStatus::RpErrInvalidMatrix,
            Error::NotPositiveDefinite { .. } => RpStatus::RpErrNotPositiveDefinite,
            Error::InvalidPenalty(_) => RpStatus::RpErrInvalidPenalty,
            Error::InvalidTarget(_) => RpStatus::RpErrInvalidTarget,
            Error::EmptyData | Error::InsufficientData { .. } | Error::InvalidFolds(_) => {
                RpStatus::RpErrInsufficientData
            }
            Error::InvalidParameter(_) => RpStatus::RpErrInvalidArgument,
            _ => RpStatus::RpErrNumeric,
        };
        Fail(code, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RpStatus::RpErrNullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RpStatus::RpErrInvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::RpOk,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            RpStatus::RpErrPanic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn matrix_ref<'a>(m: *const RpMatrix, what: &str) -> Result<&'a RpMatrix, Fail> {
    m.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed_matrix(inner: SymMatrix) -> *mut RpMatrix {
    Box::into_raw(Box::new(RpMatrix { inner }))
}

fn kind_of(code: u32) -> Result<EstimatorKind, Fail> {
    match code {
        RP_ESTIMATOR_ARCHETYPE_1 => Ok(EstimatorKind::ArchetypeI),
        RP_ESTIMATOR_ARCHETYPE_2 => Ok(EstimatorKind::ArchetypeII),
        RP_ESTIMATOR_ALT_1 => Ok(EstimatorKind::AltI),
        RP_ESTIMATOR_ALT_2 => Ok(EstimatorKind::AltII),
        other => Err(invalid(format!("unknown estimator code {other}"))),
    }
}

unsafe fn target_spec(t: *const RpTarget) -> Result<TargetSpec, Fail> {
    let Some(t) = t.as_ref() else {
        return Ok(TargetSpec::Identity);
    };
    Ok(match t.kind {
        RP_TARGET_ZERO => TargetSpec::Zero,
        RP_TARGET_IDENTITY => TargetSpec::Identity,
        RP_TARGET_SCALAR => TargetSpec::Scalar(t.value),
        RP_TARGET_DEFAULT_DIAGONAL => TargetSpec::DefaultDiagonal,
        RP_TARGET_MATRIX => TargetSpec::Fixed(Target::Full(matrix_ref(t.matrix, "target matrix")?.inner.clone())),
        other => return Err(invalid(format!("unknown target code {other}"))),
    })
}

unsafe fn data_matrix(data: *const f64, n: usize, p: usize) -> Result<DMatrix<f64>, Fail> {
    if n == 0 || p == 0 {
        return Err(Fail(RpStatus::RpErrInsufficientData, "data needs at least one row and column".into()));
    }
    let len = n.checked_mul(p).ok_or_else(|| invalid("n * p overflows"))?;
    Ok(DMatrix::from_row_slice(n, p, slice(data, len, "data")?))
}

/// Builds a `p × p` symmetric matrix from `p²` row-major values. Entries
/// mirrored across the diagonal may differ by at most 1e-9.
#[no_mangle]
pub unsafe extern "C" fn rp_matrix_new(p: usize, row_major: *const f64, out: *mut *mut RpMatrix) -> RpStatus {
    guard(|| {
        if p == 0 {
            return Err(invalid("order must be positive"));
        }
        let len = p.checked_mul(p).ok_or_else(|| invalid("p * p overflows"))?;
        let values = slice(row_major, len, "values")?;
        let m = SymMatrix::from_dmatrix_checked(DMatrix::from_row_slice(p, p, values), SYMMETRY_TOL)?;
        write_out(out, boxed_matrix(m))
    })
}

/// Order of the matrix, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rp_matrix_order(m: *const RpMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.order())
}

/// Copies the `p²` row-major entries into `out`, which holds `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rp_matrix_copy(m: *const RpMatrix, out: *mut f64, len: usize) -> RpStatus {
    guard(|| {
        let m = matrix_ref(m, "matrix")?;
        let values = m.inner.to_row_major();
        if len < values.len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", values.len())));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_matrix_free(m: *mut RpMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Divisor-`n` sample covariance of `n × p` row-major data.
#[no_mangle]
pub unsafe extern "C" fn rp_sample_cov(
    data: *const f64,
    n: usize,
    p: usize,
    center: bool,
    out: *mut *mut RpMatrix,
) -> RpStatus {
    guard(|| {
        let y = data_matrix(data, n, p)?;
        let s = estimators::sample_cov(&y, center)?;
        write_out(out, boxed_matrix(s))
    })
}

/// Fits estimator `kind` to covariance `s` at `lambda` on the estimator's own scale.
/// A null `target` means the identity.
#[no_mangle]
pub unsafe extern "C" fn rp_fit(
    kind: u32,
    s: *const RpMatrix,
    target: *const RpTarget,
    lambda: f64,
    out: *mut *mut RpEstimate,
) -> RpStatus {
    guard(|| {
        let kind = kind_of(kind)?;
        let s = &matrix_ref(s, "covariance")?.inner;
        let t = target_spec(target)?.resolve(s)?;
        let est = estimators::fit(kind, s, &t, lambda)?;
        write_out(out, Box::into_raw(Box::new(RpEstimate { inner: est })))
    })
}

/// New handle holding the precision estimate.
#[no_mangle]
pub unsafe extern "C" fn rp_estimate_omega(e: *const RpEstimate, out: *mut *mut RpMatrix) -> RpStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        write_out(out, boxed_matrix(e.inner.omega.clone()))
    })
}

/// New handle holding the covariance estimate.
#[no_mangle]
pub unsafe extern "C" fn rp_estimate_sigma(e: *const RpEstimate, out: *mut *mut RpMatrix) -> RpStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("estimate"))?;
        write_out(out, boxed_matrix(e.inner.sigma.clone()))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rp_estimate_free(e: *mut RpEstimate) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Approximate leave-one-out score of `n × p` row-major data at `lambda`.
#[no_mangle]
pub unsafe extern "C" fn rp_approx_loocv(
    data: *const f64,
    n: usize,
    p: usize,
    kind: u32,
    target: *const RpTarget,
    lambda: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let y = data_matrix(data, n, p)?;
        let spec = EstimatorSpec::new(kind_of(kind)?, target_spec(target)?);
        let config = CvConfig::new(CvScheme::ApproxLoocv, spec);
        write_out(out, cv::approx_loocv(&y, lambda, &config)?)
    })
}

/// Grid minimizer of the chosen cross-validation score.
///
/// `grid_len = 0` selects the default grid. `k` is only read for
/// `RP_SCHEME_KFOLD`.
#[no_mangle]
pub unsafe extern "C" fn rp_select_lambda(
    data: *const f64,
    n: usize,
    p: usize,
    kind: u32,
    target: *const RpTarget,
    scheme: u32,
    k: usize,
    fold_seed: u64,
    grid: *const f64,
    grid_len: usize,
    lambda_star: *mut f64,
) -> RpStatus {
    guard(|| {
        let y = data_matrix(data, n, p)?;
        let spec = EstimatorSpec::new(kind_of(kind)?, target_spec(target)?);
        let scheme = match scheme {
            RP_SCHEME_KFOLD => CvScheme::KFold(k),
            RP_SCHEME_LOOCV => CvScheme::Loocv,
            RP_SCHEME_APPROX_LOOCV => CvScheme::ApproxLoocv,
            other => return Err(invalid(format!("unknown scheme code {other}"))),
        };
        let mut config = CvConfig::new(scheme, spec);
        config.fold_seed = fold_seed;
        if grid_len > 0 {
            config.grid = Some(slice(grid, grid_len, "grid")?.to_vec());
        }
        write_out(lambda_star, cv::select_lambda(&y, &config)?.lambda_star)
    })
}

/// Partial correlation matrix of a positive definite precision matrix.
#[no_mangle]
pub unsafe extern "C" fn rp_partial_corr(omega: *const RpMatrix, out: *mut *mut RpMatrix) -> RpStatus {
    guard(|| {
        let pc = ggm::to_partial_corr(&matrix_ref(omega, "precision matrix")?.inner)?;
        write_out(out, boxed_matrix(pc.as_sym().clone()))
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
