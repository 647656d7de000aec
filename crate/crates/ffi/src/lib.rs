//! C interface to zmetrics.
//!
//! Specifications, code files and regression models are exposed as
//! opaque handles created by `zm_*_parse`/`zm_model_*` and released with
//! the matching `zm_*_free`. Every fallible call returns a [`ZmStatus`];
//! on failure a description is available from [`zm_last_error_message`]
//! on the same thread. Strings returned as `char *` are owned by the
//! caller and must be released with [`zm_string_free`]; strings returned
//! as `const char *` are borrowed from their handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use zmetrics::code::parse_code;
use zmetrics::code_metrics::{measure_units, CodeMetrics};
use zmetrics::error::{Error, ErrorKind};
use zmetrics::regression::{
    backward_eliminate, emit_formula, ols_fit, predict, ObservationMatrix, RegressionModel,
};
use zmetrics::spec::load_specification;
use zmetrics::spec_metrics::{measure_specification, SpecMetrics};
use zmetrics::stats::{correlate, CorrelationTest};

/// Result of every fallible call. The first five values match the exit
/// codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZmStatus {
    Ok = 0,
    Usage = 1,
    Parse = 2,
    Data = 3,
    Numeric = 4,
    /// A required pointer argument was NULL.
    NullArgument = 5,
    /// An index was past the end of a handle's rows.
    OutOfRange = 6,
    /// An internal panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZmCorrelationTest {
    Pearson = 0,
    Spearman = 1,
    Kendall = 2,
}

/// The eleven measures of one schema.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZmSpecMetrics {
    pub cc: u64,
    pub vl: u64,
    pub vu: u64,
    pub du: u64,
    pub uses: u64,
    pub defs: u64,
    pub ands: u64,
    pub ors: u64,
    pub cov: f64,
    pub ovl: f64,
    pub chi: f64,
}

impl From<&SpecMetrics> for ZmSpecMetrics {
    fn from(m: &SpecMetrics) -> Self {
        ZmSpecMetrics {
            cc: m.cc as u64,
            vl: m.v_l as u64,
            vu: m.v_u as u64,
            du: m.du as u64,
            uses: m.uses as u64,
            defs: m.defs as u64,
            ands: m.ands as u64,
            ors: m.ors as u64,
            cov: m.coverage,
            ovl: m.overlap,
            chi: m.coupling,
        }
    }
}

impl ZmSpecMetrics {
    fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "CC" => self.cc as f64,
            "VL" => self.vl as f64,
            "VU" => self.vu as f64,
            "DU" => self.du as f64,
            "USE" => self.uses as f64,
            "DEF" => self.defs as f64,
            "AND" => self.ands as f64,
            "OR" => self.ors as f64,
            "COV" => self.cov,
            "OVL" => self.ovl,
            "CHI" => self.chi,
            _ => return None,
        })
    }
}

/// The nine measures of one subprogram.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ZmCodeMetrics {
    pub cl: u64,
    pub clc: u64,
    pub clcd: u64,
    pub clce: u64,
    pub cyc: u64,
    pub knots: u64,
    pub fin: u64,
    pub fout: u64,
    pub si: u64,
}

impl From<&CodeMetrics> for ZmCodeMetrics {
    fn from(m: &CodeMetrics) -> Self {
        ZmCodeMetrics {
            cl: m.cl,
            clc: m.clc,
            clcd: m.clcd,
            clce: m.clce,
            cyc: m.cyc,
            knots: m.knots,
            fin: m.fin,
            fout: m.fout,
            si: m.si,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZmCorrelation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Measured schemas of one specification.
pub struct ZmSpec {
    rows: Vec<(CString, ZmSpecMetrics)>,
}

/// Measured subprograms of one code file.
pub struct ZmCode {
    rows: Vec<(CString, ZmCodeMetrics)>,
}

/// A fitted or loaded regression model.
pub struct ZmModel {
    model: RegressionModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ZmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind {
            ErrorKind::Usage => ZmStatus::Usage,
            ErrorKind::Parse => ZmStatus::Parse,
            ErrorKind::Data => ZmStatus::Data,
            ErrorKind::Numeric => ZmStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ZmStatus::NullArgument, format!("{what} is NULL"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ZmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZmStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal error");
            ZmStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(ZmStatus::Usage, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Boxes `value` into `*out`; checks `out` first so nothing leaks.
unsafe fn put_handle<T>(out: *mut *mut T, value: impl FnOnce() -> Result<T, Failure>) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value()?)));
    Ok(())
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

fn input_path() -> &'static Path {
    Path::new("<input>")
}

/// Description of the last failure on this thread, or NULL when none
/// occurred. Release with `zm_string_free`.
#[no_mangle]
pub extern "C" fn zm_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn zm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses, resolves and measures a specification given as source text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zm_spec_parse(source: *const c_char, out: *mut *mut ZmSpec) -> ZmStatus {
    guard(|| {
        put_handle(out, || {
            let src = text(source, "source")?;
            let spec = load_specification(src).map_err(|e| Error::from_spec(input_path(), e))?;
            let rows = measure_specification(&spec)
                .iter()
                .map(|(name, m)| (CString::new(name.as_str()).expect("identifier"), m.into()))
                .collect();
            Ok(ZmSpec { rows })
        })
    })
}

/// Number of schemas; 0 for NULL.
///
/// # Safety
/// `spec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_spec_schema_count(spec: *const ZmSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.rows.len())
}

/// Name of schema `index`, borrowed from the handle; NULL when out of
/// range.
///
/// # Safety
/// `spec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_spec_schema_name(spec: *const ZmSpec, index: usize) -> *const c_char {
    spec.as_ref()
        .and_then(|s| s.rows.get(index))
        .map_or(ptr::null(), |(n, _)| n.as_ptr())
}

/// Measures of schema `index`.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zm_spec_metrics(
    spec: *const ZmSpec,
    index: usize,
    out: *mut ZmSpecMetrics,
) -> ZmStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or_else(|| null("spec"))?;
        let (_, m) = spec.rows.get(index).ok_or_else(|| {
            Failure(ZmStatus::OutOfRange, format!("schema index {index} of {}", spec.rows.len()))
        })?;
        put(out, *m, "out")
    })
}

/// # Safety
/// `spec` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zm_spec_free(spec: *mut ZmSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Parses and measures one code file given as source text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zm_code_parse(source: *const c_char, out: *mut *mut ZmCode) -> ZmStatus {
    guard(|| {
        put_handle(out, || {
            let src = text(source, "source")?;
            let units = parse_code(src).map_err(|e| Error::from_code(input_path(), e))?;
            let rows = measure_units(&units)
                .iter()
                .map(|(name, m)| (CString::new(name.as_str()).expect("identifier"), m.into()))
                .collect();
            Ok(ZmCode { rows })
        })
    })
}

/// Number of subprograms; 0 for NULL.
///
/// # Safety
/// `code` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_code_unit_count(code: *const ZmCode) -> usize {
    code.as_ref().map_or(0, |c| c.rows.len())
}

/// Name of subprogram `index`, borrowed from the handle; NULL when out of
/// range.
///
/// # Safety
/// `code` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_code_unit_name(code: *const ZmCode, index: usize) -> *const c_char {
    code.as_ref()
        .and_then(|c| c.rows.get(index))
        .map_or(ptr::null(), |(n, _)| n.as_ptr())
}

/// Measures of subprogram `index`.
///
/// # Safety
/// `code` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zm_code_metrics(
    code: *const ZmCode,
    index: usize,
    out: *mut ZmCodeMetrics,
) -> ZmStatus {
    guard(|| {
        let code = code.as_ref().ok_or_else(|| null("code"))?;
        let (_, m) = code.rows.get(index).ok_or_else(|| {
            Failure(ZmStatus::OutOfRange, format!("unit index {index} of {}", code.rows.len()))
        })?;
        put(out, *m, "out")
    })
}

/// # Safety
/// `code` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zm_code_free(code: *mut ZmCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Two-tailed correlation test of two samples of length `n`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zm_correlate(
    test: ZmCorrelationTest,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut ZmCorrelation,
) -> ZmStatus {
    guard(|| {
        if x.is_null() || y.is_null() {
            return Err(null("sample"));
        }
        let (x, y) = (std::slice::from_raw_parts(x, n), std::slice::from_raw_parts(y, n));
        let test = match test {
            ZmCorrelationTest::Pearson => CorrelationTest::Pearson,
            ZmCorrelationTest::Spearman => CorrelationTest::Spearman,
            ZmCorrelationTest::Kendall => CorrelationTest::Kendall,
        };
        let c = correlate(test, x, y).map_err(Error::from)?;
        put(out, ZmCorrelation { r: c.r, p: c.p, n: c.n }, "out")
    })
}

/// Least-squares fit of `response` on `k` named predictors. `rows` holds
/// `n * k` values in row-major order. With `threshold` in (0, 1) the
/// model is reduced by backward elimination; pass 0 to keep every
/// predictor.
///
/// # Safety
/// `rows` must hold `n * k` doubles, `names` `k` NUL-terminated strings,
/// `response` `n` doubles; `target` must be NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn zm_model_fit(
    rows: *const f64,
    n: usize,
    k: usize,
    names: *const *const c_char,
    response: *const f64,
    target: *const c_char,
    threshold: f64,
    out: *mut *mut ZmModel,
) -> ZmStatus {
    guard(|| {
        if response.is_null() || (k > 0 && (rows.is_null() || names.is_null())) {
            return Err(null("input array"));
        }
        let predictors = (0..k)
            .map(|j| text(*names.add(j), "predictor name").map(String::from))
            .collect::<Result<Vec<_>, _>>()?;
        let values = if k == 0 { &[][..] } else { std::slice::from_raw_parts(rows, n * k) };
        let data = ObservationMatrix {
            target: text(target, "target")?.to_string(),
            predictors,
            rows: (0..n).map(|i| values[i * k..(i + 1) * k].to_vec()).collect(),
            response: std::slice::from_raw_parts(response, n).to_vec(),
        };
        put_handle(out, || {
            let model = if threshold == 0.0 {
                ols_fit(&data)
            } else if threshold > 0.0 && threshold < 1.0 {
                backward_eliminate(&data, threshold)
            } else {
                return Err(Failure(ZmStatus::Usage, format!("threshold {threshold} outside (0, 1)")));
            };
            Ok(ZmModel { model: model.map_err(Error::from)? })
        })
    })
}

/// Loads a model written by `zmetrics fit`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zm_model_from_json(json: *const c_char, out: *mut *mut ZmModel) -> ZmStatus {
    guard(|| {
        put_handle(out, || {
            let src = text(json, "json")?;
            let model: RegressionModel = serde_json::from_str(src)
                .map_err(|e| Error::parse(input_path(), Some(e.line()), e))?;
            Ok(ZmModel { model })
        })
    })
}

/// The model as JSON. Release with `zm_string_free`; NULL for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_model_to_json(model: *const ZmModel) -> *mut c_char {
    model.as_ref().map_or(ptr::null_mut(), |m| {
        owned(&serde_json::to_string_pretty(&m.model).expect("serializable"))
    })
}

/// The model as a formula with three-decimal coefficients. Release with
/// `zm_string_free`; NULL for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_model_formula(model: *const ZmModel) -> *mut c_char {
    model
        .as_ref()
        .map_or(ptr::null_mut(), |m| owned(&emit_formula(&m.model)))
}

/// Number of predictor terms kept in the model; 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_model_term_count(model: *const ZmModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.terms.len())
}

/// R squared of the model; NaN for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn zm_model_r2(model: *const ZmModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.model.r2)
}

/// Applies a model over spec measures to one schema's measures.
///
/// # Safety
/// `model` must be a live handle, `metrics` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zm_model_predict(
    model: *const ZmModel,
    metrics: *const ZmSpecMetrics,
    out: *mut f64,
) -> ZmStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let metrics = metrics.as_ref().ok_or_else(|| null("metrics"))?;
        let y = predict(&model.model, |name| metrics.get(name))
            .map_err(Error::from)?;
        put(out, y, "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zm_model_free(model: *mut ZmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
