//! C ABI for the survival core.
//!
//! Objects cross the boundary as opaque handles created by `st_*_new`/`fit`
//! functions and released with the matching `st_*_free`. Every fallible call
//! returns an [`StStatus`]; on failure, [`st_last_error_message`] describes
//! the most recent error on the calling thread. Panics are caught and
//! reported as [`StStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use survtrans::ingest::SurvivalDataset;
use survtrans::metrics::{concordance_index, roc_auc};
use survtrans::survival::{cox_fit, km_fit, FitOptions};
use survtrans::{CoxModel, Error, KaplanMeierCurve};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    EmptyDataset = 4,
    NoEvents = 5,
    SingularHessian = 6,
    Undefined = 7,
    Serialization = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Survival dataset handle.
pub struct StDataset(SurvivalDataset);

/// Fitted Cox model handle.
pub struct StCoxModel(CoxModel);

/// Kaplan-Meier curve handle.
pub struct StKmCurve(KaplanMeierCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> StStatus {
    match err {
        Error::Io { .. } => StStatus::Io,
        Error::TooManyMalformed { .. } | Error::Serialization(_) => StStatus::Serialization,
        Error::InvalidInput(_) | Error::NonFinite { .. } => StStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => StStatus::DimensionMismatch,
        Error::EmptyDataset(_) => StStatus::EmptyDataset,
        Error::NoEvents => StStatus::NoEvents,
        Error::SingularHessian { .. } => StStatus::SingularHessian,
        Error::Undefined(_) => StStatus::Undefined,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> StStatus
where
    F: FnOnce() -> Result<(), (StStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StStatus::Panic
        }
    }
}

fn fail(err: Error) -> (StStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (StStatus, String) {
    (StStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], (StStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (StStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (StStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a dataset from column arrays. `covariates` is row-major,
/// `n_rows * n_features` long; `events` holds 0 or 1 per row.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_new(
    n_rows: usize,
    n_features: usize,
    durations: *const f64,
    events: *const u8,
    covariates: *const f64,
    out: *mut *mut StDataset,
) -> StStatus {
    guard(|| {
        let d = slice(durations, n_rows, "durations")?;
        let e = slice(events, n_rows, "events")?;
        let x = slice(covariates, n_rows * n_features, "covariates")?;
        let flags: Vec<bool> = e.iter().map(|&v| v != 0).collect();
        let rows: Vec<Vec<f64>> = if n_features == 0 {
            vec![Vec::new(); n_rows]
        } else {
            x.chunks(n_features).map(<[f64]>::to_vec).collect()
        };
        let names = (0..n_features).map(|j| format!("x{j}")).collect();
        let ds = SurvivalDataset::from_columns(names, d, &flags, rows).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(StDataset(ds))), "out")
    })
}

/// # Safety
/// `dataset` must come from [`st_dataset_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn st_dataset_free(dataset: *mut StDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fits a ridge-penalized Cox model with default Newton settings.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_cox_fit(dataset: *const StDataset, penalizer: f64, out: *mut *mut StCoxModel) -> StStatus {
    guard(|| {
        let ds = handle(dataset, "dataset")?;
        let model = cox_fit(&ds.0, penalizer, &FitOptions::default()).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(StCoxModel(model))), "out")
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn st_cox_free(model: *mut StCoxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn st_cox_n_features(model: *const StCoxModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_features())
}

/// Copies coefficients, standard errors and two-sided Wald p-values into
/// caller buffers of length `len`, which must equal the feature count. Any
/// output pointer may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn st_cox_coefficients(
    model: *const StCoxModel,
    beta: *mut f64,
    standard_errors: *mut f64,
    p_values: *mut f64,
    len: usize,
) -> StStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if len != m.n_features() {
            return Err(fail(Error::DimensionMismatch {
                expected: m.n_features(),
                got: len,
            }));
        }
        let coefs = m.coefficients();
        for (i, c) in coefs.iter().enumerate() {
            if !beta.is_null() {
                *beta.add(i) = c.beta;
            }
            if !standard_errors.is_null() {
                *standard_errors.add(i) = c.standard_error;
            }
            if !p_values.is_null() {
                *p_values.add(i) = c.p_value;
            }
        }
        Ok(())
    })
}

/// Predicted survival curve for covariates `x`. Writes up to `capacity`
/// points and always sets `out_len` to the full curve length; returns
/// `BufferTooSmall` when `capacity` is insufficient.
///
/// # Safety
/// `x` must hold `n_features` doubles; `times` and `survival` must hold
/// `capacity` doubles; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_cox_predict_survival(
    model: *const StCoxModel,
    x: *const f64,
    n_features: usize,
    times: *mut f64,
    survival: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> StStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let x = slice(x, n_features, "x")?;
        let pred = m.predict_survival(x).map_err(fail)?;
        write_out(out_len, pred.times.len(), "out_len")?;
        if capacity < pred.times.len() {
            return Err((
                StStatus::BufferTooSmall,
                format!("need {} points, buffer holds {capacity}", pred.times.len()),
            ));
        }
        if times.is_null() || survival.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(pred.times.as_ptr(), times, pred.times.len());
        ptr::copy_nonoverlapping(pred.probabilities.as_ptr(), survival, pred.probabilities.len());
        Ok(())
    })
}

/// `S(t | x)` for one time point.
///
/// # Safety
/// `x` must hold `n_features` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_cox_survival_at(
    model: *const StCoxModel,
    x: *const f64,
    n_features: usize,
    t: f64,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let x = slice(x, n_features, "x")?;
        write_out(out, m.survival_at(x, t).map_err(fail)?, "out")
    })
}

/// Serializes the model as JSON. Release the string with [`st_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_cox_to_json(model: *const StCoxModel, out: *mut *mut c_char) -> StStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let text = m.to_json().map_err(fail)?;
        let c = CString::new(text).map_err(|e| (StStatus::Serialization, e.to_string()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// Restores a model from JSON produced by [`st_cox_to_json`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_cox_from_json(json: *const c_char, out: *mut *mut StCoxModel) -> StStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (StStatus::Serialization, e.to_string()))?;
        let model = CoxModel::from_json(text).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(StCoxModel(model))), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn st_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kaplan-Meier estimate from `n` durations and 0/1 event flags.
///
/// # Safety
/// Arrays must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_km_fit(
    durations: *const f64,
    events: *const u8,
    n: usize,
    out: *mut *mut StKmCurve,
) -> StStatus {
    guard(|| {
        let d = slice(durations, n, "durations")?;
        let e: Vec<bool> = slice(events, n, "events")?.iter().map(|&v| v != 0).collect();
        let curve = km_fit(d, &e).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(StKmCurve(curve))), "out")
    })
}

/// Number of event times on the curve, or 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn st_km_len(curve: *const StKmCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Point `index` of the curve. Any output pointer may be null.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn st_km_point(
    curve: *const StKmCurve,
    index: usize,
    time: *mut f64,
    survival: *mut f64,
    at_risk: *mut usize,
    events: *mut usize,
) -> StStatus {
    guard(|| {
        let c = &handle(curve, "curve")?.0;
        if index >= c.len() {
            return Err((StStatus::InvalidArgument, format!("index {index} out of range {}", c.len())));
        }
        if !time.is_null() {
            *time = c.times[index];
        }
        if !survival.is_null() {
            *survival = c.survival[index];
        }
        if !at_risk.is_null() {
            *at_risk = c.at_risk[index];
        }
        if !events.is_null() {
            *events = c.events[index];
        }
        Ok(())
    })
}

/// Step-function value `S(t)`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_km_survival_at(curve: *const StKmCurve, t: f64, out: *mut f64) -> StStatus {
    guard(|| {
        let c = &handle(curve, "curve")?.0;
        write_out(out, c.survival_at(t), "out")
    })
}

/// # Safety
/// `curve` must come from [`st_km_fit`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn st_km_free(curve: *mut StKmCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Harrell's concordance index; higher risk means an earlier event.
///
/// # Safety
/// Arrays must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_concordance_index(
    durations: *const f64,
    events: *const u8,
    risks: *const f64,
    n: usize,
    out: *mut f64,
) -> StStatus {
    guard(|| {
        let d = slice(durations, n, "durations")?;
        let e: Vec<bool> = slice(events, n, "events")?.iter().map(|&v| v != 0).collect();
        let r = slice(risks, n, "risks")?;
        let report = concordance_index(d, &e, r).map_err(fail)?;
        write_out(out, report.index, "out")
    })
}

/// Mann-Whitney ROC AUC over 0/1 labels and scores.
///
/// # Safety
/// Arrays must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_roc_auc(labels: *const u8, scores: *const f64, n: usize, out: *mut f64) -> StStatus {
    guard(|| {
        let l: Vec<bool> = slice(labels, n, "labels")?.iter().map(|&v| v != 0).collect();
        let s = slice(scores, n, "scores")?;
        write_out(out, roc_auc(&l, s).map_err(fail)?, "out")
    })
}
