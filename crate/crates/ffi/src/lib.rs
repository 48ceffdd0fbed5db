//! C ABI for `ilis-lab`.
//!
//! Every fallible call returns an [`IlisStatus`]; on anything other than
//! `ILIS_STATUS_OK` a description is available from
//! [`ilis_last_error_message`] on the same thread. Objects are handed out as
//! opaque pointers and must be released with the matching `*_free` function.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and released with [`ilis_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ilis_lab::asymptotics::{self, MgfSource};
use ilis_lab::enumerate::{default_workers, enumerate_distribution_with, enumeration_cap, EnumOptions, SnDistribution};
use ilis_lab::montecarlo::{run_simulation, SimulationConfig, SimulationReport};
use ilis_lab::perm::{decompose, PermStats, Permutation};
use ilis_lab::series::{h_eval, h_series_with, SeriesOptions, TruncatedSeries};
use ilis_lab::LabError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Capacity = 4,
    ResourceLimit = 5,
    Io = 6,
    Panic = 7,
}

/// Source of `E(y^{s_n})` for [`ilis_mgf_normalized`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlisMgfSource {
    Enumeration = 0,
    Series = 1,
    Darboux = 2,
}

/// Per-permutation statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IlisPermStats {
    /// initial increasing run of the one-line form
    pub ilis: u64,
    /// sum of cycle ILIS lengths
    pub s: u64,
    /// largest cycle ILIS length
    pub max_ilis: u64,
    /// longest increasing subsequence
    pub lis: u64,
    pub cycle_count: u64,
}

/// Scalar fields of a simulation report. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IlisReportSummary {
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub mean_offset: f64,
    pub ks_distance: f64,
    pub ks_distance_standardized: f64,
}

/// Exact distribution of `s_n`.
pub struct IlisDistribution(SnDistribution);

/// Truncated power series.
pub struct IlisSeries(TruncatedSeries);

/// Monte Carlo report.
pub struct IlisReport(SimulationReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &LabError) -> IlisStatus {
    match err {
        LabError::InvalidInput(_) | LabError::Json(_) => IlisStatus::InvalidInput,
        LabError::Domain(_) => IlisStatus::Domain,
        LabError::CapExceeded { .. } | LabError::Capability(_) => IlisStatus::Capacity,
        LabError::ResourceLimit(_) => IlisStatus::ResourceLimit,
        LabError::Io(_) => IlisStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lab(LabError),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Lab(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IlisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            IlisStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            IlisStatus::NullPointer
        }
        Ok(Err(Failure::Lab(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            IlisStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn permutation_from(image: *const u32, n: usize) -> Result<Permutation, Failure> {
    if image.is_null() {
        return Err(Failure::Null("image"));
    }
    let values = std::slice::from_raw_parts(image, n);
    Ok(Permutation::new(values.iter().map(|&v| v as usize).collect())?)
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::Lab(LabError::InvalidInput("string contains NUL".into())))
}

fn opt_nan(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ilis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failed call on this thread, or an empty
/// string. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ilis_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ilis_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Statistics of the permutation whose one-line form is `image[0..n]`
/// (values 1-based).
///
/// # Safety
/// `image` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_perm_stats(image: *const u32, n: usize, out: *mut IlisPermStats) -> IlisStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = permutation_from(image, n)?;
        let st = PermStats::of(&p);
        *out = IlisPermStats {
            ilis: st.ilis as u64,
            s: st.s as u64,
            max_ilis: st.max_ilis as u64,
            lis: st.lis as u64,
            cycle_count: decompose(&p).len() as u64,
        };
        Ok(())
    })
}

/// Canonical cycle string such as `(1)(2 3 5 7)(4)(6)`.
///
/// # Safety
/// `image` must point to `n` readable values; `out` must be writable. Free the
/// result with [`ilis_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ilis_perm_cycles(image: *const u32, n: usize, out: *mut *mut c_char) -> IlisStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = permutation_from(image, n)?;
        *out = into_c_string(decompose(&p).to_string())?;
        Ok(())
    })
}

/// Exact distribution of `s_n`. `workers = 0` uses all cores. The cap comes
/// from `ILIS_LAB_CAP` (default 10).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_enumerate(n: u32, workers: u32, out: *mut *mut IlisDistribution) -> IlisStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let opts = EnumOptions {
            cap: enumeration_cap(),
            workers: if workers == 0 { default_workers() } else { workers as usize },
        };
        let d = enumerate_distribution_with(n as usize, opts)?;
        *out = Box::into_raw(Box::new(IlisDistribution(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a live handle from [`ilis_enumerate`].
#[no_mangle]
pub unsafe extern "C" fn ilis_distribution_free(d: *mut IlisDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of permutations with `s_n = j`. Fails with capacity if the count
/// does not fit 64 bits.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_distribution_count(d: *const IlisDistribution, j: u32, out: *mut u64) -> IlisStatus {
    guard(|| {
        let d = in_ref(d, "distribution")?;
        let out = out_ref(out, "out")?;
        *out = u64::try_from(d.0.count(j as usize))
            .map_err(|_| LabError::Capability("count exceeds 64 bits".into()))?;
        Ok(())
    })
}

/// `E(y^{s_n})`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_distribution_expected_y_power(
    d: *const IlisDistribution,
    y: f64,
    out: *mut f64,
) -> IlisStatus {
    guard(|| {
        let d = in_ref(d, "distribution")?;
        *out_ref(out, "out")? = d.0.expected_y_power(y);
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_distribution_moments(
    d: *const IlisDistribution,
    mean: *mut f64,
    variance: *mut f64,
) -> IlisStatus {
    guard(|| {
        let d = in_ref(d, "distribution")?;
        let mean = out_ref(mean, "mean")?;
        let variance = out_ref(variance, "variance")?;
        (*mean, *variance) = d.0.exact_moments();
        Ok(())
    })
}

/// `{"n": .., "counts": {"j": "count"}, "total": ".."}`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable. Free the result with
/// [`ilis_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ilis_distribution_to_json(d: *const IlisDistribution, out: *mut *mut c_char) -> IlisStatus {
    guard(|| {
        let d = in_ref(d, "distribution")?;
        let out = out_ref(out, "out")?;
        *out = into_c_string(d.0.to_json()?)?;
        Ok(())
    })
}

/// `H(x, y)` truncated at `x^order`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_h_series(
    y: f64,
    order: usize,
    allow_outside_window: bool,
    out: *mut *mut IlisSeries,
) -> IlisStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let s = h_series_with(y, order, SeriesOptions { allow_outside_window })?;
        *out = Box::into_raw(Box::new(IlisSeries(s)));
        Ok(())
    })
}

/// Truncation order `N`; the series has `N + 1` coefficients. Returns 0 for
/// a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ilis_series_order(s: *const IlisSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.order())
}

/// Copies the `order + 1` coefficients into `buf`.
///
/// # Safety
/// `s` must be a live handle and `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ilis_series_coeffs(s: *const IlisSeries, buf: *mut f64, len: usize) -> IlisStatus {
    guard(|| {
        let s = in_ref(s, "series")?;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let coeffs = s.0.coeffs();
        if len < coeffs.len() {
            return Err(LabError::InvalidInput(format!("buffer holds {len}, need {}", coeffs.len())).into());
        }
        std::slice::from_raw_parts_mut(buf, coeffs.len()).copy_from_slice(coeffs);
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle from [`ilis_h_series`].
#[no_mangle]
pub unsafe extern "C" fn ilis_series_free(s: *mut IlisSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `h(y) = Σ (-1)^{j-1} y^j / (j·j!)` summed to tolerance `tol`.
#[no_mangle]
pub extern "C" fn ilis_h(y: f64, tol: f64) -> f64 {
    h_eval(y, tol)
}

/// Leading asymptotic of `E(y^{s_n})`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_darboux_expectation(y: f64, n: u64, out: *mut f64) -> IlisStatus {
    guard(|| {
        *out_ref(out, "out")? = asymptotics::darboux_expectation(y, n)?;
        Ok(())
    })
}

/// `E(e^{t s'_n})` from the chosen source.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_mgf_normalized(n: u64, t: f64, source: IlisMgfSource, out: *mut f64) -> IlisStatus {
    guard(|| {
        let source = match source {
            IlisMgfSource::Enumeration => MgfSource::Enumeration,
            IlisMgfSource::Series => MgfSource::Series,
            IlisMgfSource::Darboux => MgfSource::Darboux,
        };
        *out_ref(out, "out")? = asymptotics::mgf_normalized(n, t, source)?;
        Ok(())
    })
}

/// Euler's gamma function; domain error at poles.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_gamma(z: f64, out: *mut f64) -> IlisStatus {
    guard(|| {
        *out_ref(out, "out")? = asymptotics::gamma_fn(z)?;
        Ok(())
    })
}

/// Standard normal distribution function.
#[no_mangle]
pub extern "C" fn ilis_normal_cdf(u: f64) -> f64 {
    asymptotics::normal_cdf(u)
}

/// Runs a Monte Carlo simulation. `workers = 0` uses all cores.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_simulate(
    n: u64,
    samples: u64,
    seed: u64,
    workers: u32,
    out: *mut *mut IlisReport,
) -> IlisStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = SimulationConfig {
            n: usize::try_from(n).map_err(|_| LabError::InvalidInput("n too large".into()))?,
            samples,
            seed,
            workers: if workers == 0 { default_workers() } else { workers as usize },
        };
        let r = run_simulation(&cfg)?;
        *out = Box::into_raw(Box::new(IlisReport(r)));
        Ok(())
    })
}

/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilis_report_summary(r: *const IlisReport, out: *mut IlisReportSummary) -> IlisStatus {
    guard(|| {
        let r = &in_ref(r, "report")?.0;
        *out_ref(out, "out")? = IlisReportSummary {
            n: r.n as u64,
            samples: r.samples,
            seed: r.seed,
            empirical_mean: r.empirical_mean,
            empirical_variance: r.empirical_variance,
            mean_offset: opt_nan(r.mean_offset),
            ks_distance: opt_nan(r.ks_distance),
            ks_distance_standardized: opt_nan(r.ks_distance_standardized),
        };
        Ok(())
    })
}

/// Full report as JSON, identical to the `simulate` subcommand output.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable. Free the result with
/// [`ilis_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ilis_report_to_json(r: *const IlisReport, out: *mut *mut c_char) -> IlisStatus {
    guard(|| {
        let r = in_ref(r, "report")?;
        let out = out_ref(out, "out")?;
        *out = into_c_string(r.0.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle from [`ilis_simulate`].
#[no_mangle]
pub unsafe extern "C" fn ilis_report_free(r: *mut IlisReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
