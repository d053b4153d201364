//! C ABI for the alsim simulation harness.
//!
//! Every function returns an [`AlsimStatus`]; on failure a message is
//! available from [`alsim_last_error`] on the same thread. Handles are opaque
//! and owned by the caller until passed to the matching `_free` function.
//! Strings returned through out-parameters are released with
//! [`alsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use alsim::config::{config_fingerprint, parse_config, ExperimentConfig};
use alsim::curve::LearningCurve;
use alsim::simulator::{run_experiment, RunOptions};
use alsim::teachers::{margin_score, StrategyRegistry};
use alsim::tracking::{AggregatedCurve, RunStore};
use alsim::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsimStatus {
    Ok = 0,
    /// A null pointer, invalid UTF-8 or an out-of-range index.
    InvalidArgument = 1,
    /// The configuration could not be parsed or failed validation.
    InvalidConfig = 2,
    Io = 3,
    Corpus = 4,
    Strategy = 5,
    Store = 6,
    /// One or more seed runs failed or were interrupted; they can be resumed.
    RunFailed = 7,
    Internal = 8,
}

impl From<&Error> for AlsimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Validation { .. } => AlsimStatus::InvalidConfig,
            Error::Io { .. } => AlsimStatus::Io,
            Error::MalformedRecord { .. } | Error::Corpus(_) | Error::SpanTaskUnsupported => AlsimStatus::Corpus,
            Error::UnknownStrategy(_) | Error::Strategy(_) => AlsimStatus::Strategy,
            Error::Store(_)
            | Error::UnknownRun(_)
            | Error::RunNotSuccessful { .. }
            | Error::FingerprintMismatch { .. }
            | Error::CorruptArtifact { .. }
            | Error::MissingArtifact(_) => AlsimStatus::Store,
            Error::Paused { .. } | Error::Interrupted { .. } | Error::SeedRunsFailed(_) => AlsimStatus::RunFailed,
            _ => AlsimStatus::Internal,
        }
    }
}

/// A validated experiment configuration.
pub struct AlsimConfig {
    inner: ExperimentConfig,
}

/// Per-seed and aggregated learning curves of a finished experiment.
pub struct AlsimExperiment {
    seeds: Vec<LearningCurve>,
    aggregate: AggregatedCurve,
    aggregate_run_id: CString,
}

/// One point of a per-seed learning curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlsimCurvePoint {
    pub step_index: u64,
    pub labeled_count: u64,
    pub dev_macro_f1: f64,
    pub test_macro_f1: f64,
    pub dev_accuracy: f64,
    pub test_accuracy: f64,
}

/// Cross-seed statistics of one metric at one step.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlsimAggregatePoint {
    pub step_index: u64,
    pub labeled_count: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(AlsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(AlsimStatus::from(&e), e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(AlsimStatus::InvalidArgument, message.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlsimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlsimStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            AlsimStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

fn owned_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn alsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn alsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn alsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a configuration file (includes are followed).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_config_load(path: *const c_char, out_config: *mut *mut AlsimConfig) -> AlsimStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        *slot = ptr::null_mut();
        let cfg = parse_config(&PathBuf::from(text(path, "path")?))?;
        *slot = Box::into_raw(Box::new(AlsimConfig { inner: cfg }));
        Ok(())
    })
}

/// Applies a `section.key=value` override in place. On failure the
/// configuration is unchanged.
///
/// # Safety
/// `config` must be a live handle; `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn alsim_config_set(config: *mut AlsimConfig, assignment: *const c_char) -> AlsimStatus {
    guard(|| {
        let cfg = out(config, "config")?;
        cfg.inner = cfg.inner.with_override(text(assignment, "assignment")?)?;
        Ok(())
    })
}

/// Hex digest identifying the experiment (every section except tracking).
///
/// # Safety
/// `config` must be a live handle; `out_hex` must be writable. The string is
/// released with [`alsim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn alsim_config_fingerprint(config: *const AlsimConfig, out_hex: *mut *mut c_char) -> AlsimStatus {
    guard(|| {
        let slot = out(out_hex, "out_hex")?;
        *slot = owned_string(&config_fingerprint(&handle(config, "config")?.inner));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn alsim_config_free(config: *mut AlsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs (or loads from the store) the configured experiment with the built-in
/// strategies. `store_dir` may be null to use the configured store.
///
/// # Safety
/// `config` must be a live handle; `store_dir` null or NUL-terminated;
/// `out_experiment` writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_run(
    config: *const AlsimConfig,
    store_dir: *const c_char,
    resume: bool,
    out_experiment: *mut *mut AlsimExperiment,
) -> AlsimStatus {
    guard(|| {
        let slot = out(out_experiment, "out_experiment")?;
        *slot = ptr::null_mut();
        let cfg = &handle(config, "config")?.inner;
        let root = if store_dir.is_null() { cfg.store_dir() } else { PathBuf::from(text(store_dir, "store_dir")?) };
        let store = RunStore::open(root)?;
        let opts = RunOptions {
            resume,
            ..Default::default()
        };
        let outcome = run_experiment(&store, cfg, &StrategyRegistry::with_builtin(), &opts)?;
        *slot = Box::into_raw(Box::new(AlsimExperiment {
            seeds: outcome.seed_runs.into_iter().map(|s| s.curve).collect(),
            aggregate: outcome.aggregate,
            aggregate_run_id: CString::new(outcome.aggregate_run_id).expect("run ids have no nul bytes"),
        }));
        Ok(())
    })
}

/// # Safety
/// `experiment` must be null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_free(experiment: *mut AlsimExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Run id of the aggregate, owned by the handle.
///
/// # Safety
/// `experiment` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_aggregate_run_id(experiment: *const AlsimExperiment) -> *const c_char {
    experiment.as_ref().map_or(ptr::null(), |e| e.aggregate_run_id.as_ptr())
}

/// # Safety
/// `experiment` must be a live handle; `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_seed_count(experiment: *const AlsimExperiment, out_count: *mut usize) -> AlsimStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(experiment, "experiment")?.seeds.len();
        Ok(())
    })
}

/// Seed value and number of curve points of seed run `seed_index`.
///
/// # Safety
/// `experiment` must be a live handle; out-parameters writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_seed(
    experiment: *const AlsimExperiment,
    seed_index: usize,
    out_seed: *mut u64,
    out_points: *mut usize,
) -> AlsimStatus {
    guard(|| {
        let e = handle(experiment, "experiment")?;
        let curve = e.seeds.get(seed_index).ok_or_else(|| invalid(format!("seed index {seed_index} out of range")))?;
        *out(out_seed, "out_seed")? = curve.seed;
        *out(out_points, "out_points")? = curve.points.len();
        Ok(())
    })
}

/// # Safety
/// `experiment` must be a live handle; `out_point` writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_point(
    experiment: *const AlsimExperiment,
    seed_index: usize,
    point_index: usize,
    out_point: *mut AlsimCurvePoint,
) -> AlsimStatus {
    guard(|| {
        let e = handle(experiment, "experiment")?;
        let p = e
            .seeds
            .get(seed_index)
            .and_then(|c| c.points.get(point_index))
            .ok_or_else(|| invalid(format!("point ({seed_index}, {point_index}) out of range")))?;
        *out(out_point, "out_point")? = AlsimCurvePoint {
            step_index: p.step_index as u64,
            labeled_count: p.labeled_count as u64,
            dev_macro_f1: p.dev.macro_f1,
            test_macro_f1: p.test.macro_f1,
            dev_accuracy: p.dev.accuracy,
            test_accuracy: p.test.accuracy,
        };
        Ok(())
    })
}

/// # Safety
/// `experiment` must be a live handle; `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_aggregate_count(experiment: *const AlsimExperiment, out_count: *mut usize) -> AlsimStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(experiment, "experiment")?.aggregate.points.len();
        Ok(())
    })
}

/// Statistics of `metric` (`dev_macro_f1`, `test_macro_f1`, `dev_accuracy`
/// or `test_accuracy`) at aggregate step `index`.
///
/// # Safety
/// `experiment` must be a live handle; `metric` NUL-terminated; `out_point`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_experiment_aggregate_point(
    experiment: *const AlsimExperiment,
    index: usize,
    metric: *const c_char,
    out_point: *mut AlsimAggregatePoint,
) -> AlsimStatus {
    guard(|| {
        let e = handle(experiment, "experiment")?;
        let name = text(metric, "metric")?;
        let p = e.aggregate.points.get(index).ok_or_else(|| invalid(format!("aggregate index {index} out of range")))?;
        let s = p.metric(name).ok_or_else(|| invalid(format!("unknown metric `{name}`")))?;
        *out(out_point, "out_point")? = AlsimAggregatePoint {
            step_index: p.step_index as u64,
            labeled_count: p.labeled_count as u64,
            mean: s.mean,
            min: s.min,
            max: s.max,
            std: s.std,
        };
        Ok(())
    })
}

/// Best minus second-best probability of one document.
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out_margin` writable.
#[no_mangle]
pub unsafe extern "C" fn alsim_margin_score(probs: *const f64, len: usize, out_margin: *mut f64) -> AlsimStatus {
    guard(|| {
        if probs.is_null() {
            return Err(invalid("probs is null"));
        }
        let slice = std::slice::from_raw_parts(probs, len);
        *out(out_margin, "out_margin")? = margin_score(slice)?;
        Ok(())
    })
}
