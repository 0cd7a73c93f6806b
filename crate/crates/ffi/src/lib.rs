//! C ABI for the credal-lln library.
//!
//! Conventions, mirrored in the generated `include/credal_lln.h`:
//!
//! - Every function returns a [`cl_status`]; outputs go through out
//!   pointers. `CL_OK` means the out parameters are valid. On any other
//!   status, [`cl_last_error_message`] returns a human-readable reason
//!   (thread-local, valid until the next failing call on the same thread).
//! - `CL_ERR_CHECK_FAILED` is not an error of use: the computation ran and
//!   its JSON result was written, but the mathematical verdict is negative
//!   (a verification FAIL, a martingale check that did not pass).
//! - Process specs travel as opaque `cl_spec` handles created from the same
//!   JSON the CLI reads (`cl_spec_parse_json`) and released with
//!   `cl_spec_free`.
//! - Strings returned through `char **out_json` are heap-allocated UTF-8,
//!   NUL-terminated, and must be released with `cl_string_free`.
//! - No callback ever crosses the boundary, and every entry point catches
//!   panics, so the library never unwinds into C.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use credal_lln::bounds::{self, report, FormulaId, MomentSpec, RangeSpec};
use credal_lln::error::Error;
use credal_lln::examples;
use credal_lln::martingale::{
    check_khr_exact, check_martingale_exact, check_second_moment_identity, TreeCheckOptions,
};
use credal_lln::process::{
    count_events, exact_event_probability, lower_upper_event_probability_dp, parse_strategy,
    strategy_names, verify_bound, EventSpec, ProcessSpec, Strategy, Verdict, VerifyOptions,
};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum cl_status {
    /// Success; out parameters are valid.
    CL_OK = 0,
    /// The computation ran and wrote its result, but the mathematical
    /// verdict is negative (verification FAIL, check not passed).
    CL_ERR_CHECK_FAILED = 1,
    /// Malformed or out-of-domain input.
    CL_ERR_INVALID_INPUT = 2,
    /// An exact enumeration would exceed its configured cap.
    CL_ERR_CAPACITY = 3,
    /// Conditioning on an event of upper probability zero.
    CL_ERR_UNDEFINED_CONDITIONING = 4,
    /// The strict-positive-lower conditioning policy refused the event.
    CL_ERR_POLICY_VIOLATION = 5,
    /// A strategy proposed a distribution outside its step constraint.
    CL_ERR_STRATEGY_VIOLATION = 6,
    /// Operating-system level I/O failure.
    CL_ERR_IO = 7,
    /// JSON that does not parse or does not match the expected shape.
    CL_ERR_JSON = 8,
    /// A `char *` argument was not valid UTF-8.
    CL_ERR_UTF8 = 9,
    /// A required pointer argument was NULL.
    CL_ERR_NULL_POINTER = 10,
    /// An internal panic was caught at the boundary; state is unchanged.
    CL_ERR_PANIC = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: cl_status, msg: impl Into<Vec<u8>>) -> cl_status {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> cl_status {
    match e {
        Error::InvalidInput(_) => cl_status::CL_ERR_INVALID_INPUT,
        Error::Capacity { .. } => cl_status::CL_ERR_CAPACITY,
        Error::UndefinedConditioning => cl_status::CL_ERR_UNDEFINED_CONDITIONING,
        Error::PolicyViolation => cl_status::CL_ERR_POLICY_VIOLATION,
        Error::StrategyViolation { .. } => cl_status::CL_ERR_STRATEGY_VIOLATION,
        Error::Io(_) => cl_status::CL_ERR_IO,
        Error::Json(_) => cl_status::CL_ERR_JSON,
    }
}

fn fail_with(e: Error) -> cl_status {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Run `f` with panics converted to `CL_ERR_PANIC`.
fn guarded(f: impl FnOnce() -> cl_status) -> cl_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = if let Some(s) = payload.downcast_ref::<&str>() {
                format!("internal panic: {s}")
            } else if let Some(s) = payload.downcast_ref::<String>() {
                format!("internal panic: {s}")
            } else {
                "internal panic".to_string()
            };
            fail(cl_status::CL_ERR_PANIC, msg)
        }
    }
}

/// # Safety
/// `p` must be NULL or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, cl_status> {
    if p.is_null() {
        return Err(fail(
            cl_status::CL_ERR_NULL_POINTER,
            format!("{what} is NULL"),
        ));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(cl_status::CL_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), cl_status> {
    if out.is_null() {
        return Err(fail(
            cl_status::CL_ERR_NULL_POINTER,
            format!("{what} is NULL"),
        ));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn write_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), cl_status> {
    if out.is_null() {
        return Err(fail(cl_status::CL_ERR_NULL_POINTER, "out_json is NULL"));
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| fail(cl_status::CL_ERR_JSON, e.to_string()))?;
    let c = CString::new(text)
        .map_err(|_| fail(cl_status::CL_ERR_JSON, "JSON contained a NUL byte"))?;
    unsafe { out.write(c.into_raw()) };
    Ok(())
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! try_core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail_with(e),
        }
    };
}

// ---------------------------------------------------------------------------
// Library metadata and memory discipline.

/// Version of the library, as a static string; do not free.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, or NULL if none.
/// Valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn cl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Release a string returned through a `char **out_json` parameter.
/// Passing NULL is a no-op.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ---------------------------------------------------------------------------
// Process-spec handles.

/// Opaque process specification handle.
#[repr(C)]
pub struct cl_spec {
    _private: [u8; 0],
}

fn spec_ref<'a>(spec: *const cl_spec, what: &str) -> Result<&'a ProcessSpec, cl_status> {
    if spec.is_null() {
        return Err(fail(
            cl_status::CL_ERR_NULL_POINTER,
            format!("{what} is NULL"),
        ));
    }
    Ok(unsafe { &*(spec as *const ProcessSpec) })
}

/// Parse a process spec from JSON (either the explicit `{"steps": [...]}`
/// form or the homogeneous `{"horizon": n, "step": {...}}` form).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_spec_parse_json(
    json: *const c_char,
    out: *mut *mut cl_spec,
) -> cl_status {
    guarded(|| {
        let text = try_ffi!(unsafe { read_str(json, "json") });
        if out.is_null() {
            return fail(cl_status::CL_ERR_NULL_POINTER, "out is NULL");
        }
        let spec: ProcessSpec = match serde_json::from_str(text).map_err(Error::from) {
            Ok(s) => s,
            Err(e) => return fail_with(e),
        };
        let raw = Box::into_raw(Box::new(spec)) as *mut cl_spec;
        unsafe { out.write(raw) };
        cl_status::CL_OK
    })
}

/// Release a spec handle. Passing NULL is a no-op.
///
/// # Safety
/// `spec` must have come from `cl_spec_parse_json` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn cl_spec_free(spec: *mut cl_spec) {
    if !spec.is_null() {
        drop(unsafe { Box::from_raw(spec as *mut ProcessSpec) });
    }
}

/// Number of steps in the spec.
#[no_mangle]
pub extern "C" fn cl_spec_horizon(spec: *const cl_spec, out: *mut u64) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        try_ffi!(write_out(out, s.horizon() as u64, "out"));
        cl_status::CL_OK
    })
}

/// Serialize the spec back to its explicit JSON form.
#[no_mangle]
pub extern "C" fn cl_spec_to_json(spec: *const cl_spec, out_json: *mut *mut c_char) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        try_ffi!(write_json(out_json, s));
        cl_status::CL_OK
    })
}

// ---------------------------------------------------------------------------
// Closed-form bounds (uniform-range variants take one width for all steps).

/// Exponential tail bound for sums of `[0, b]`-valued draws, one side.
#[no_mangle]
pub extern "C" fn cl_hoeffding_tail_uniform(
    epsilon: f64,
    b: f64,
    n: u64,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        let r = try_core!(RangeSpec::uniform(b, n as usize));
        let rep = try_core!(bounds::hoeffding_tail(epsilon, &r));
        try_ffi!(write_out(out, rep.value, "out"));
        cl_status::CL_OK
    })
}

/// Azuma-style tail bound under per-step range `b`, one side.
#[no_mangle]
pub extern "C" fn cl_azuma_tail_uniform(epsilon: f64, b: f64, n: u64, out: *mut f64) -> cl_status {
    guarded(|| {
        let r = try_core!(RangeSpec::uniform(b, n as usize));
        let rep = try_core!(bounds::azuma_tail(epsilon, &r));
        try_ffi!(write_out(out, rep.value, "out"));
        cl_status::CL_OK
    })
}

/// Two-sided mean-band coverage lower bound for bounded steps.
#[no_mangle]
pub extern "C" fn cl_wlln_coverage_bounded_uniform(
    n: u64,
    epsilon: f64,
    b: f64,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        let r = try_core!(RangeSpec::uniform(b, n as usize));
        let rep = try_core!(bounds::wlln_coverage_bounded(n, epsilon, &r));
        try_ffi!(write_out(out, rep.value, "out"));
        cl_status::CL_OK
    })
}

/// Dominated-convergence variant of the bounded coverage bound.
#[no_mangle]
pub extern "C" fn cl_dcm_coverage_bounded_uniform(
    n: u64,
    epsilon: f64,
    b: f64,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        let r = try_core!(RangeSpec::uniform(b, n as usize));
        let rep = try_core!(bounds::dcm_coverage_bounded(n, epsilon, &r));
        try_ffi!(write_out(out, rep.value, "out"));
        cl_status::CL_OK
    })
}

/// Two-sided coverage lower bound under moment constraints
/// (variance cap `sigma2`, mean half-width `delta`).
#[no_mangle]
pub extern "C" fn cl_wlln_coverage_unbounded(
    n: u64,
    epsilon: f64,
    sigma2: f64,
    delta: f64,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        let m = try_core!(MomentSpec::new(sigma2, delta));
        let rep = try_core!(bounds::wlln_coverage_unbounded(n, epsilon, &m));
        try_ffi!(write_out(out, rep.value, "out"));
        cl_status::CL_OK
    })
}

/// Smallest horizon from which the running-mean band of width `epsilon`
/// holds with the strong-law guarantee, bounded case.
#[no_mangle]
pub extern "C" fn cl_slln_threshold_bounded(epsilon: f64, b_max: f64, out: *mut u64) -> cl_status {
    guarded(|| {
        let t = try_core!(bounds::slln_threshold_bounded(epsilon, b_max));
        try_ffi!(write_out(out, t.n, "out"));
        cl_status::CL_OK
    })
}

/// Strong-law threshold under moment constraints.
#[no_mangle]
pub extern "C" fn cl_slln_threshold_unbounded(
    epsilon: f64,
    sigma2: f64,
    delta: f64,
    out: *mut u64,
) -> cl_status {
    guarded(|| {
        let m = try_core!(MomentSpec::new(sigma2, delta));
        let t = try_core!(bounds::slln_threshold_unbounded(epsilon, &m));
        try_ffi!(write_out(out, t.n, "out"));
        cl_status::CL_OK
    })
}

/// Markov tail bound `min(expectation_upper / epsilon, 1)` for non-negative
/// draws.
#[no_mangle]
pub extern "C" fn cl_markov_tail(expectation_upper: f64, epsilon: f64, out: *mut f64) -> cl_status {
    guarded(|| {
        let v = try_core!(bounds::markov_tail(expectation_upper, epsilon));
        try_ffi!(write_out(out, v, "out"));
        cl_status::CL_OK
    })
}

/// `exp(s^2 (b - a)^2 / 8)`: dominates `E[exp(s X)]` for any distribution on
/// `[a, b]` with mean at most zero.
#[no_mangle]
pub extern "C" fn cl_hoeffding_mgf_bound(s: f64, a: f64, b: f64, out: *mut f64) -> cl_status {
    guarded(|| {
        let v = try_core!(bounds::hoeffding_mgf_bound(s, a, b));
        try_ffi!(write_out(out, v, "out"));
        cl_status::CL_OK
    })
}

/// Maximal-inequality coverage lower bound from per-step second moments and
/// non-decreasing band levels (`len` entries each).
///
/// # Safety
/// `second_moments` and `epsilons` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn cl_khr_bound(
    second_moments: *const f64,
    epsilons: *const f64,
    len: usize,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        if second_moments.is_null() || epsilons.is_null() {
            return fail(
                cl_status::CL_ERR_NULL_POINTER,
                "moment/epsilon arrays must not be NULL",
            );
        }
        let m = unsafe { std::slice::from_raw_parts(second_moments, len) };
        let e = unsafe { std::slice::from_raw_parts(epsilons, len) };
        let v = try_core!(bounds::khr_bound(m, e));
        try_ffi!(write_out(out, v, "out"));
        cl_status::CL_OK
    })
}

/// JSON request for [`cl_bound_report_json`].
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundRequest {
    formula: FormulaId,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    n: Option<u64>,
    /// Per-step ranges; a single entry is recycled over `n` steps.
    #[serde(default)]
    b: Option<Vec<f64>>,
    #[serde(default)]
    b_max: Option<f64>,
    #[serde(default)]
    sigma2: Option<f64>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    expectation_upper: Option<f64>,
    #[serde(default)]
    s: Option<f64>,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    b_upper: Option<f64>,
    #[serde(default)]
    second_moments: Option<Vec<f64>>,
    #[serde(default)]
    epsilons: Option<Vec<f64>>,
}

fn need<T: Copy>(x: Option<T>, what: &str, formula: FormulaId) -> Result<T, Error> {
    x.ok_or_else(|| Error::invalid(format!("{formula} needs `{what}`")))
}

fn range_of(req: &BoundRequest) -> Result<RangeSpec, Error> {
    let b = req
        .b
        .clone()
        .ok_or_else(|| Error::invalid(format!("{} needs `b`", req.formula)))?;
    match (b.len(), req.n) {
        (1, Some(n)) => RangeSpec::uniform(b[0], n as usize),
        (_, None) | (_, Some(_)) if !b.is_empty() => {
            if let Some(n) = req.n {
                if n as usize != b.len() {
                    return Err(Error::invalid(format!(
                        "`n` = {n} disagrees with {} range entries",
                        b.len()
                    )));
                }
            }
            RangeSpec::new(b)
        }
        _ => Err(Error::invalid("`b` must be non-empty")),
    }
}

fn eval_bound_request(req: &BoundRequest) -> Result<bounds::BoundReport, Error> {
    let f = req.formula;
    match f {
        FormulaId::Thm1 => {
            bounds::hoeffding_tail(need(req.epsilon, "epsilon", f)?, &range_of(req)?)
        }
        FormulaId::Thm2 => bounds::azuma_tail(need(req.epsilon, "epsilon", f)?, &range_of(req)?),
        FormulaId::Thm3Wlln => bounds::wlln_coverage_bounded(
            need(req.n, "n", f)?,
            need(req.epsilon, "epsilon", f)?,
            &range_of(req)?,
        ),
        FormulaId::DcmWlln => bounds::dcm_coverage_bounded(
            need(req.n, "n", f)?,
            need(req.epsilon, "epsilon", f)?,
            &range_of(req)?,
        ),
        FormulaId::Thm3SllnN => report::thm3_slln(
            need(req.epsilon, "epsilon", f)?,
            need(req.b_max, "b_max", f)?,
        ),
        FormulaId::Thm4Wlln => bounds::wlln_coverage_unbounded(
            need(req.n, "n", f)?,
            need(req.epsilon, "epsilon", f)?,
            &MomentSpec::new(need(req.sigma2, "sigma2", f)?, need(req.delta, "delta", f)?)?,
        ),
        FormulaId::Thm4SllnN => report::thm4_slln(
            need(req.epsilon, "epsilon", f)?,
            &MomentSpec::new(need(req.sigma2, "sigma2", f)?, need(req.delta, "delta", f)?)?,
        ),
        FormulaId::Markov => report::markov(
            need(req.expectation_upper, "expectation_upper", f)?,
            need(req.epsilon, "epsilon", f)?,
        ),
        FormulaId::HoeffdingMgf => report::hoeffding_mgf(
            need(req.s, "s", f)?,
            need(req.a, "a", f)?,
            need(req.b_upper, "b_upper", f)?,
        ),
        FormulaId::Khr => report::khr(
            req.second_moments
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("{f} needs `second_moments`")))?,
            req.epsilons
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("{f} needs `epsilons`")))?,
        ),
    }
}

/// Evaluate any formula from a JSON request
/// (`{"formula": "thm1", "epsilon": 2.5, "b": [1], "n": 10}`) into a full
/// bound-report JSON document.
///
/// # Safety
/// `request_json` must be a NUL-terminated string; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_bound_report_json(
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let text = try_ffi!(unsafe { read_str(request_json, "request_json") });
        let req: BoundRequest = match serde_json::from_str(text).map_err(Error::from) {
            Ok(r) => r,
            Err(e) => return fail_with(e),
        };
        let rep = try_core!(eval_bound_request(&req));
        try_ffi!(write_json(out_json, &rep));
        cl_status::CL_OK
    })
}

// ---------------------------------------------------------------------------
// Process evaluation.

fn parse_event(json: *const c_char) -> Result<EventSpec, cl_status> {
    let text = unsafe { read_str(json, "event_json") }?;
    serde_json::from_str(text).map_err(|e| fail_with(Error::from(e)))
}

fn parse_strategies(
    csv: *const c_char,
    spec: &ProcessSpec,
) -> Result<Vec<Box<dyn Strategy>>, cl_status> {
    if csv.is_null() {
        return Ok(credal_lln::process::builtin_strategies(spec));
    }
    let text = unsafe { read_str(csv, "strategies") }?;
    let mut out = Vec::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(parse_strategy(name).map_err(fail_with)?);
    }
    if out.is_empty() {
        return Err(fail(cl_status::CL_ERR_INVALID_INPUT, "no strategies given"));
    }
    Ok(out)
}

/// Exact probability of `event_json` under `strategy` by tree enumeration
/// (`leaf_cap` 0 means the library default).
///
/// # Safety
/// String arguments must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_exact_event_probability(
    spec: *const cl_spec,
    strategy: *const c_char,
    event_json: *const c_char,
    leaf_cap: u64,
    out: *mut f64,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let name = try_ffi!(unsafe { read_str(strategy, "strategy") });
        let strat = try_core!(parse_strategy(name));
        let event = try_ffi!(parse_event(event_json));
        let cap = (leaf_cap > 0).then_some(leaf_cap as u128);
        let p = try_core!(exact_event_probability(s, strat.as_ref(), &event, cap));
        try_ffi!(write_out(out, p, "out"));
        cl_status::CL_OK
    })
}

/// Envelope `[lower, upper]` of the event probability over all adversarial
/// strategies, by backward induction (all-credal specs, draw-measurable
/// events).
///
/// # Safety
/// `event_json` must be NUL-terminated; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn cl_dp_event_envelope(
    spec: *const cl_spec,
    event_json: *const c_char,
    leaf_cap: u64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let event = try_ffi!(parse_event(event_json));
        let cap = (leaf_cap > 0).then_some(leaf_cap as u128);
        let (lo, hi) = try_core!(lower_upper_event_probability_dp(s, &event, cap));
        try_ffi!(write_out(out_lower, lo, "out_lower"));
        try_ffi!(write_out(out_upper, hi, "out_upper"));
        cl_status::CL_OK
    })
}

/// Monte-Carlo count of how many of `trials` trajectories satisfy the event
/// (counter-based seeding: equal seeds give equal counts on any machine).
///
/// # Safety
/// String arguments must be NUL-terminated; `out_count` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_count_event(
    spec: *const cl_spec,
    strategy: *const c_char,
    event_json: *const c_char,
    trials: u64,
    seed: u64,
    out_count: *mut u64,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let name = try_ffi!(unsafe { read_str(strategy, "strategy") });
        let strat = try_core!(parse_strategy(name));
        let event = try_ffi!(parse_event(event_json));
        let counts = try_core!(count_events(
            s,
            strat.as_ref(),
            &[event],
            trials,
            seed,
            None
        ));
        try_ffi!(write_out(out_count, counts[0], "out_count"));
        cl_status::CL_OK
    })
}

/// Verify a bound report (JSON, as produced by `cl_bound_report_json`)
/// against the spec: Monte Carlo with exact binomial intervals, plus exact
/// enumeration and the adversarial envelope where feasible. Writes the full
/// verification record as JSON. `strategies` is a comma-separated name list,
/// or NULL for the built-in adversaries. Returns `CL_ERR_CHECK_FAILED` when
/// the verdict is FAIL (the record is still written).
///
/// # Safety
/// String arguments must be NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_verify_json(
    spec: *const cl_spec,
    strategies: *const c_char,
    event_json: *const c_char,
    report_json: *const c_char,
    trials: u64,
    seed: u64,
    alpha: f64,
    use_exact: bool,
    use_dp: bool,
    leaf_cap: u64,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let strats = try_ffi!(parse_strategies(strategies, s));
        let event = try_ffi!(parse_event(event_json));
        let rep_text = try_ffi!(unsafe { read_str(report_json, "report_json") });
        let rep: bounds::BoundReport = match serde_json::from_str(rep_text).map_err(Error::from) {
            Ok(r) => r,
            Err(e) => return fail_with(e),
        };
        let opts = VerifyOptions {
            trials,
            seed,
            workers: None,
            alpha,
            use_exact,
            use_dp,
            leaf_cap: (leaf_cap > 0).then_some(leaf_cap as u128),
        };
        let record = try_core!(verify_bound(s, &strats, &event, &rep, &opts));
        try_ffi!(write_json(out_json, &record));
        if record.verdict == Verdict::Fail {
            return fail(cl_status::CL_ERR_CHECK_FAILED, "verification verdict: FAIL");
        }
        cl_status::CL_OK
    })
}

// ---------------------------------------------------------------------------
// Exact martingale checks.

/// Exact martingale-property check by tree enumeration; writes the report
/// JSON and returns `CL_ERR_CHECK_FAILED` when the deviation exceeds `tol`.
/// `mean_bias` deliberately corrupts the reported means (fault injection).
///
/// # Safety
/// `strategy` must be NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_check_martingale_json(
    spec: *const cl_spec,
    strategy: *const c_char,
    tol: f64,
    mean_bias: f64,
    leaf_cap: u64,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let name = try_ffi!(unsafe { read_str(strategy, "strategy") });
        let strat = try_core!(parse_strategy(name));
        let opts = TreeCheckOptions {
            tol,
            leaf_cap: (leaf_cap > 0).then_some(leaf_cap as u128),
            mean_bias,
        };
        let rep = try_core!(check_martingale_exact(s, strat.as_ref(), &opts));
        try_ffi!(write_json(out_json, &rep));
        if !rep.passed {
            return fail(
                cl_status::CL_ERR_CHECK_FAILED,
                format!(
                    "martingale deviation {} exceeds tol {tol}",
                    rep.max_deviation
                ),
            );
        }
        cl_status::CL_OK
    })
}

/// Exact second-moment identity check; same conventions as
/// `cl_check_martingale_json`.
///
/// # Safety
/// `strategy` must be NUL-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_check_second_moment_json(
    spec: *const cl_spec,
    strategy: *const c_char,
    tol: f64,
    mean_bias: f64,
    leaf_cap: u64,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let name = try_ffi!(unsafe { read_str(strategy, "strategy") });
        let strat = try_core!(parse_strategy(name));
        let opts = TreeCheckOptions {
            tol,
            leaf_cap: (leaf_cap > 0).then_some(leaf_cap as u128),
            mean_bias,
        };
        let rep = try_core!(check_second_moment_identity(s, strat.as_ref(), &opts));
        try_ffi!(write_json(out_json, &rep));
        if !rep.passed {
            return fail(
                cl_status::CL_ERR_CHECK_FAILED,
                format!("second-moment gap {} exceeds tol {tol}", rep.gap),
            );
        }
        cl_status::CL_OK
    })
}

/// Exact maximal-inequality check: enumerated band probability against the
/// closed-form bound on the enumerated step moments (`epsilons`: one
/// non-decreasing level per step).
///
/// # Safety
/// `strategy` must be NUL-terminated, `epsilons` must point to `len`
/// readable doubles, `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_check_khr_json(
    spec: *const cl_spec,
    strategy: *const c_char,
    epsilons: *const f64,
    len: usize,
    tol: f64,
    leaf_cap: u64,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let s = try_ffi!(spec_ref(spec, "spec"));
        let name = try_ffi!(unsafe { read_str(strategy, "strategy") });
        let strat = try_core!(parse_strategy(name));
        if epsilons.is_null() {
            return fail(cl_status::CL_ERR_NULL_POINTER, "epsilons is NULL");
        }
        let eps = unsafe { std::slice::from_raw_parts(epsilons, len) };
        let opts = TreeCheckOptions {
            tol,
            leaf_cap: (leaf_cap > 0).then_some(leaf_cap as u128),
            mean_bias: 0.0,
        };
        let rep = try_core!(check_khr_exact(s, strat.as_ref(), eps, &opts));
        try_ffi!(write_json(out_json, &rep));
        if !rep.passed {
            return fail(
                cl_status::CL_ERR_CHECK_FAILED,
                format!(
                    "exact band probability {} under bound {}",
                    rep.exact, rep.bound
                ),
            );
        }
        cl_status::CL_OK
    })
}

// ---------------------------------------------------------------------------
// The contamination example.

/// Closed-form per-model coverages and their lower envelope for the
/// contamination example at contamination rate `delta` and band `epsilon`.
/// Writes `p1`, `p2`, `p3`, `lower` through out pointers (any may be NULL
/// to skip).
#[no_mangle]
pub extern "C" fn cl_example1_coverage(
    delta: f64,
    epsilon: f64,
    n: u64,
    out_p1: *mut f64,
    out_p2: *mut f64,
    out_p3: *mut f64,
    out_lower: *mut f64,
) -> cl_status {
    guarded(|| {
        let c = try_core!(examples::example1_coverage(delta, epsilon, n));
        for (p, v) in [
            (out_p1, c.p1),
            (out_p2, c.p2),
            (out_p3, c.p3),
            (out_lower, c.lower),
        ] {
            if !p.is_null() {
                unsafe { p.write(v) };
            }
        }
        cl_status::CL_OK
    })
}

/// Conditional-envelope gap of the contamination example's length-`i`
/// truncation at coordinate `i`, under both conditioning policies; the
/// report is written as JSON. Coordinates above 5 exceed the event-
/// enumeration cap and return `CL_ERR_CAPACITY`.
#[no_mangle]
pub extern "C" fn cl_example1_gap_json(
    delta: f64,
    coordinate: usize,
    out_json: *mut *mut c_char,
) -> cl_status {
    guarded(|| {
        let gap = try_core!(examples::example1_gap(
            delta,
            coordinate,
            &credal_lln::irrelevance::IrrelevanceOptions::default(),
        ));
        try_ffi!(write_json(out_json, &gap));
        cl_status::CL_OK
    })
}

/// Names of the built-in strategies, as a JSON array of strings.
#[no_mangle]
pub extern "C" fn cl_strategy_names_json(out_json: *mut *mut c_char) -> cl_status {
    guarded(|| {
        let names = strategy_names();
        try_ffi!(write_json(out_json, &names));
        cl_status::CL_OK
    })
}
