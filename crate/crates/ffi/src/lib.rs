//! C ABI for switchrisk.
//!
//! Every fallible function returns an [`SrStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be fetched with [`sr_last_error`]. Datasets and models are opaque handles
//! released with their `_free` functions; strings returned to the caller are
//! released with [`sr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use switchrisk::bounds::{self, BoundReport, RiskFormula};
use switchrisk::capacity::rademacher_linear_bound;
use switchrisk::data::{rescale_dataset, Dataset, LossParams};
use switchrisk::experiments::model_risk;
use switchrisk::learn::{fit_pws, fit_switching_linear, FitOptions};
use switchrisk::models::{Model, ModelJson};
use switchrisk::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidInput = 3,
    Numerical = 4,
    ResourceLimit = 5,
    Data = 6,
    Io = 7,
    Json = 8,
    Utf8 = 9,
    Panic = 10,
}

/// Opaque regression sample.
pub struct SrDataset(Dataset);

/// Opaque fitted model, with the target scaling of its training data.
pub struct SrModel {
    model: Model,
    json: ModelJson,
}

/// Terms of a risk bound; `clamped_total = min(raw_total, 1)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SrBoundReport {
    pub empirical_risk: f64,
    pub control_term: f64,
    pub confidence_term: f64,
    pub raw_total: f64,
    pub clamped_total: f64,
}

impl From<&BoundReport> for SrBoundReport {
    fn from(r: &BoundReport) -> Self {
        SrBoundReport {
            empirical_risk: r.empirical_risk,
            control_term: r.control_term,
            confidence_term: r.confidence_term,
            raw_total: r.raw_total,
            clamped_total: r.clamped_total,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::InvalidParameter(_) => SrStatus::InvalidParameter,
        Error::InvalidInput(_) => SrStatus::InvalidInput,
        Error::Numerical(_) => SrStatus::Numerical,
        Error::ResourceLimit(_) => SrStatus::ResourceLimit,
        Error::Data { .. } => SrStatus::Data,
        Error::Io(_) => SrStatus::Io,
        Error::Json(_) => SrStatus::Json,
    }
}

struct Fail(SrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SrStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SrStatus::Utf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(SrStatus::Utf8, "string contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or NULL. Free it with
/// `sr_string_free`.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a sample from row-major inputs `xs` (`n * d` values) and targets
/// `ys` (`n` values). Targets are used as given.
///
/// # Safety
/// `xs` and `ys` must point to `n * d` and `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_dataset_new(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    d: usize,
    out_dataset: *mut *mut SrDataset,
) -> SrStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        if xs.is_null() || ys.is_null() {
            return Err(null("xs or ys"));
        }
        if n == 0 || d == 0 {
            return Err(Fail(SrStatus::InvalidInput, "n and d must be >= 1".into()));
        }
        let flat = std::slice::from_raw_parts(xs, n * d);
        let rows = flat.chunks(d).map(<[f64]>::to_vec).collect();
        let ys = std::slice::from_raw_parts(ys, n).to_vec();
        let ds = Dataset::new(rows, ys)?;
        *slot = Box::into_raw(Box::new(SrDataset(ds)));
        Ok(())
    })
}

/// Reads a `x1,...,xd,y` CSV file and rescales its targets onto
/// `[-1/2, 1/2]`.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sr_dataset_from_csv(path: *const c_char, out_dataset: *mut *mut SrDataset) -> SrStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        let raw = Dataset::from_csv_path(str_arg(path, "path")?)?;
        *slot = Box::into_raw(Box::new(SrDataset(rescale_dataset(&raw)?)));
        Ok(())
    })
}

/// Number of samples; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_dataset_len(dataset: *const SrDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Input dimension; 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_dataset_dim(dataset: *const SrDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.dim())
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_dataset_free(dataset: *mut SrDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

unsafe fn fit_with(
    dataset: *const SrDataset,
    modes: usize,
    seed: u64,
    restarts: usize,
    out_model: *mut *mut SrModel,
    out_objective: *mut f64,
    pws: bool,
) -> SrStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.0;
        let mut opts = FitOptions::default().with_seed(seed);
        if restarts > 0 {
            opts = opts.with_restarts(restarts);
        }
        let fit = if pws {
            fit_pws(ds, modes, &opts)?
        } else {
            fit_switching_linear(ds, modes, &opts)?
        };
        if let Some(o) = out_objective.as_mut() {
            *o = fit.objective;
        }
        let json = fit.model.to_json(ds.scale(), false);
        *slot = Box::into_raw(Box::new(SrModel { model: fit.model, json }));
        Ok(())
    })
}

/// Fits a switching linear model with `modes` components by alternating
/// least squares. `restarts = 0` uses the default. `out_objective` may be
/// NULL.
///
/// # Safety
/// `dataset` must be a live handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_fit_switching_linear(
    dataset: *const SrDataset,
    modes: usize,
    seed: u64,
    restarts: usize,
    out_model: *mut *mut SrModel,
    out_objective: *mut f64,
) -> SrStatus {
    fit_with(dataset, modes, seed, restarts, out_model, out_objective, false)
}

/// Fits a PWS model with a linear classifier and linear components.
///
/// # Safety
/// As for `sr_fit_switching_linear`.
#[no_mangle]
pub unsafe extern "C" fn sr_fit_pws(
    dataset: *const SrDataset,
    modes: usize,
    seed: u64,
    restarts: usize,
    out_model: *mut *mut SrModel,
    out_objective: *mut f64,
) -> SrStatus {
    fit_with(dataset, modes, seed, restarts, out_model, out_objective, true)
}

/// Parses a model from JSON (a bare model or a `fit` report).
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sr_model_from_json(json: *const c_char, out_model: *mut *mut SrModel) -> SrStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let value: serde_json::Value = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        let value = value.get("model").cloned().unwrap_or(value);
        let json: ModelJson = serde_json::from_value(value).map_err(Error::from)?;
        let model = Model::from_json(&json)?;
        *slot = Box::into_raw(Box::new(SrModel { model, json }));
        Ok(())
    })
}

/// Serializes a model to JSON. Free the string with `sr_string_free`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_model_to_json(model: *const SrModel, out_json: *mut *mut c_char) -> SrStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *slot = into_c_string(serde_json::to_string(&m.json).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Number of modes; 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_model_modes(model: *const SrModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.modes())
}

/// Empirical ℓp risk of the clipped model on `dataset` (switching risk for
/// switching models).
///
/// # Safety
/// Both handles must be live; `out_risk` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_model_risk(
    model: *const SrModel,
    dataset: *const SrDataset,
    p: f64,
    out_risk: *mut f64,
) -> SrStatus {
    guard(|| {
        let slot = out(out_risk, "out_risk")?;
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.0;
        *slot = model_risk(&m.model, ds, LossParams::new(p)?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_model_free(model: *mut SrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluates a risk formula given as JSON, e.g.
/// `{"formula":"switching-linear","p":2,"r_x":1,"r_w":1}`.
///
/// # Safety
/// `formula_json` must be a NUL-terminated string; `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_bound_evaluate(
    formula_json: *const c_char,
    empirical_risk: f64,
    modes: usize,
    n: usize,
    delta: f64,
    out_report: *mut SrBoundReport,
) -> SrStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        let f: RiskFormula = serde_json::from_str(str_arg(formula_json, "formula_json")?).map_err(Error::from)?;
        *slot = (&f.evaluate(empirical_risk, modes, n, delta)?).into();
        Ok(())
    })
}

/// `emp + 2pC R_x R_w / √n + √(ln(1/δ) / 2n)`.
///
/// # Safety
/// `out_report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_risk_bound_switching_linear(
    empirical_risk: f64,
    p: f64,
    modes: usize,
    r_x: f64,
    r_w: f64,
    n: usize,
    delta: f64,
    out_report: *mut SrBoundReport,
) -> SrStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        let r = bounds::risk_bound_switching_linear(empirical_risk, p, modes, r_x, r_w, n, delta)?;
        *slot = (&r).into();
        Ok(())
    })
}

/// `R_x R_w / √n`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_rademacher_linear_bound(r_x: f64, r_w: f64, n: usize, out_value: *mut f64) -> SrStatus {
    guard(|| {
        *out(out_value, "out_value")? = rademacher_linear_bound(r_x, r_w, n)?;
        Ok(())
    })
}

/// Chained Rademacher bound of the switching loss class with linear
/// components.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_rad_bound_switching_linear_chained(
    modes: usize,
    d: usize,
    p: f64,
    r_x: f64,
    r_w: f64,
    n: usize,
    out_value: *mut f64,
) -> SrStatus {
    guard(|| {
        *out(out_value, "out_value")? = bounds::rad_bound_switching_linear_chained(modes, d, p, r_x, r_w, n)?;
        Ok(())
    })
}

/// Chained Rademacher bound of the switching loss class with RKHS-ball
/// components.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_rad_bound_switching_kernel(
    modes: usize,
    p: f64,
    r_x: f64,
    r_h: f64,
    n: usize,
    out_value: *mut f64,
) -> SrStatus {
    guard(|| {
        *out(out_value, "out_value")? = bounds::rad_bound_switching_kernel(modes, p, r_x, r_h, n)?;
        Ok(())
    })
}

/// Rademacher bound of a PWS class with RKHS-ball components.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_rad_bound_pws_kernel(
    modes: usize,
    d: usize,
    r_x: f64,
    r_h: f64,
    n: usize,
    out_value: *mut f64,
) -> SrStatus {
    guard(|| {
        *out(out_value, "out_value")? = bounds::rad_bound_pws_kernel(modes, d, r_x, r_h, n)?;
        Ok(())
    })
}
