//! C ABI over the sampled-leader following library. Scenarios, runs and
//! arrival plans are opaque handles; every call returns a status code and
//! the last failure message is retrievable per thread.
//!
//! Ownership: `*_new`/`*_load`/`lfsim_run`/`lfsim_design` hand out handles
//! the caller must release with the matching `*_free`; `NULL` is accepted
//! and ignored by the free functions.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use lfsim::arrivals::WaypointPlan;
use lfsim::config::{self, RunOverrides, ScenarioConfig};
use lfsim::report;
use lfsim::simulator::{self, TrajectoryLog};

/// Outcome of an interface call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfsimStatus {
    Ok = 0,
    NullArgument = 1,
    Utf8Error = 2,
    ParseError = 3,
    ValidationError = 4,
    RuntimeError = 5,
    IoError = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Loaded scenario configuration (opaque).
pub struct LfsimScenario {
    cfg: ScenarioConfig,
}

/// Finished simulation run (opaque).
pub struct LfsimRun {
    name: String,
    steps: usize,
    log: TrajectoryLog,
}

/// Designed arrival-time plan (opaque).
pub struct LfsimPlan {
    plan: WaypointPlan,
}

fn guard<F: FnOnce() -> LfsimStatus>(f: F) -> LfsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            LfsimStatus::RuntimeError
        }
    }
}

/// # Safety
/// `ptr` must be either NULL or a NUL-terminated string valid for the call.
unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, LfsimStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(LfsimStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LfsimStatus::Utf8Error
    })
}

fn make_scenario(cfg: ScenarioConfig, out: *mut *mut LfsimScenario) -> LfsimStatus {
    let issues = cfg.validate();
    if !issues.is_empty() {
        set_error(issues.join("\n"));
        return LfsimStatus::ValidationError;
    }
    unsafe {
        *out = Box::into_raw(Box::new(LfsimScenario { cfg }));
    }
    LfsimStatus::Ok
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be NULL (query mode).
#[no_mangle]
pub unsafe extern "C" fn lfsim_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Loads one of the built-in scenarios (`msd`, `waypoints`, `aircraft`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_scenario_builtin(
    name: *const c_char,
    out: *mut *mut LfsimScenario,
) -> LfsimStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return LfsimStatus::NullArgument;
        }
        let name = match cstr(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let Some(text) = config::builtin(name) else {
            set_error(format!("unknown built-in scenario `{name}`"));
            return LfsimStatus::ParseError;
        };
        match config::load_config_str(text) {
            Ok(cfg) => make_scenario(cfg, out),
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::ParseError
            }
        }
    })
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_scenario_from_str(
    text: *const c_char,
    out: *mut *mut LfsimScenario,
) -> LfsimStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return LfsimStatus::NullArgument;
        }
        let text = match cstr(text) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match config::load_config_str(text) {
            Ok(cfg) => make_scenario(cfg, out),
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::ParseError
            }
        }
    })
}

/// Loads a scenario from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_scenario_from_file(
    path: *const c_char,
    out: *mut *mut LfsimScenario,
) -> LfsimStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return LfsimStatus::NullArgument;
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match config::load_config(Path::new(path)) {
            Ok(cfg) => make_scenario(cfg, out),
            Err(e @ lfsim::Error::Io(_)) => {
                set_error(e.to_string());
                LfsimStatus::IoError
            }
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::ParseError
            }
        }
    })
}

/// # Safety
/// `s` must be a handle from a scenario constructor, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn lfsim_scenario_free(s: *mut LfsimScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Simulates the scenario. `steps_per_epoch = 0` keeps the configured value.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run(
    s: *const LfsimScenario,
    steps_per_epoch: usize,
    out: *mut *mut LfsimRun,
) -> LfsimStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            set_error("null argument");
            return LfsimStatus::NullArgument;
        }
        let cfg = &(*s).cfg;
        let overrides = RunOverrides {
            steps_per_epoch: (steps_per_epoch > 0).then_some(steps_per_epoch),
            ..Default::default()
        };
        let built = match cfg.build(&overrides) {
            Ok(b) => b,
            Err(e) => {
                set_error(e.to_string());
                return LfsimStatus::ValidationError;
            }
        };
        let steps = built.policy.steps_per_epoch;
        match simulator::run_scenario(built.scenario) {
            Ok(log) => {
                *out = Box::into_raw(Box::new(LfsimRun {
                    name: built.name,
                    steps,
                    log,
                }));
                LfsimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::RuntimeError
            }
        }
    })
}

/// # Safety
/// `r` must be a handle from `lfsim_run`, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_free(r: *mut LfsimRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_follower_count(r: *const LfsimRun) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).log.follower_count()
}

/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_grid_len(r: *const LfsimRun) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).log.grid_len()
}

/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_epoch_count(r: *const LfsimRun) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).log.epochs.len()
}

/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_state_dim(r: *const LfsimRun) -> usize {
    if r.is_null() {
        return 0;
    }
    let log = &(*r).log;
    if log.states.is_empty() {
        return 0;
    }
    log.states[0][0].len()
}

/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_input_dim(r: *const LfsimRun) -> usize {
    if r.is_null() {
        return 0;
    }
    let log = &(*r).log;
    if log.inputs.is_empty() {
        return 0;
    }
    log.inputs[0][0].len()
}

unsafe fn copy_slice(src: &[f64], buf: *mut f64, len: usize) -> LfsimStatus {
    if buf.is_null() {
        set_error("null buffer");
        return LfsimStatus::NullArgument;
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} required", src.len()));
        return LfsimStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    LfsimStatus::Ok
}

/// Copies the shared time grid.
///
/// # Safety
/// `r` must be a live run handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_times(
    r: *const LfsimRun,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        copy_slice(&(*r).log.times, buf, len)
    })
}

unsafe fn copy_series(
    series: &[Vec<Vec<f64>>],
    follower: usize,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    if follower >= series.len() {
        set_error(format!("follower index {follower} out of range"));
        return LfsimStatus::OutOfRange;
    }
    let flat: Vec<f64> = series[follower].iter().flatten().copied().collect();
    copy_slice(&flat, buf, len)
}

/// Copies follower states, row-major over `grid_len x state_dim`.
///
/// # Safety
/// `r` must be a live run handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_states(
    r: *const LfsimRun,
    follower: usize,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        copy_series(&(*r).log.states, follower, buf, len)
    })
}

/// Copies follower inputs, row-major over `grid_len x input_dim`.
///
/// # Safety
/// `r` must be a live run handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_inputs(
    r: *const LfsimRun,
    follower: usize,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        copy_series(&(*r).log.inputs, follower, buf, len)
    })
}

/// Copies one follower's per-epoch arrival errors.
///
/// # Safety
/// `r` must be a live run handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_arrival_errors(
    r: *const LfsimRun,
    follower: usize,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        let log = &(*r).log;
        if follower >= log.follower_count() {
            set_error(format!("follower index {follower} out of range"));
            return LfsimStatus::OutOfRange;
        }
        let errs: Vec<f64> = log
            .epochs
            .iter()
            .map(|e| e.followers[follower].arrival_error)
            .collect();
        copy_slice(&errs, buf, len)
    })
}

/// Largest arrival error over all followers and epochs.
///
/// # Safety
/// `r` must be a live run handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_max_arrival_error(
    r: *const LfsimRun,
    out: *mut f64,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() || out.is_null() {
            set_error("null argument");
            return LfsimStatus::NullArgument;
        }
        *out = (*r)
            .log
            .epochs
            .iter()
            .flat_map(|e| e.followers.iter().map(|f| f.arrival_error))
            .fold(0.0, f64::max);
        LfsimStatus::Ok
    })
}

/// Largest absolute physical input over all followers and epochs.
///
/// # Safety
/// `r` must be a live run handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_max_abs_input(
    r: *const LfsimRun,
    out: *mut f64,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() || out.is_null() {
            set_error("null argument");
            return LfsimStatus::NullArgument;
        }
        *out = (*r)
            .log
            .epochs
            .iter()
            .flat_map(|e| e.followers.iter().map(|f| f.max_abs_input))
            .fold(0.0, f64::max);
        LfsimStatus::Ok
    })
}

/// Writes the trajectory CSV of a finished run.
///
/// # Safety
/// `r` must be a live run handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_write_csv(
    r: *const LfsimRun,
    path: *const c_char,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match report::write_csv_file(&(*r).log, Path::new(path)) {
            Ok(()) => LfsimStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::IoError
            }
        }
    })
}

/// Writes the per-epoch metrics summary of a finished run.
///
/// # Safety
/// `r` must be a live run handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lfsim_run_write_metrics(
    r: *const LfsimRun,
    path: *const c_char,
) -> LfsimStatus {
    guard(|| {
        if r.is_null() {
            set_error("null run handle");
            return LfsimStatus::NullArgument;
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let run = &*r;
        let summary = report::metrics_summary(&run.log, &run.name, run.steps);
        match report::write_metrics_file(&summary, Path::new(path)) {
            Ok(()) => LfsimStatus::Ok,
            Err(e) => {
                set_error(e.to_string());
                LfsimStatus::IoError
            }
        }
    })
}

/// Designs the arrival-time plan of a scenario whose schedule requests it.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lfsim_design(
    s: *const LfsimScenario,
    out: *mut *mut LfsimPlan,
) -> LfsimStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            set_error("null argument");
            return LfsimStatus::NullArgument;
        }
        let built = match (*s).cfg.build(&RunOverrides::default()) {
            Ok(b) => b,
            Err(e) => {
                set_error(e.to_string());
                return LfsimStatus::ValidationError;
            }
        };
        match built.plan {
            Some(plan) => {
                *out = Box::into_raw(Box::new(LfsimPlan { plan }));
                LfsimStatus::Ok
            }
            None => {
                set_error("scenario does not request arrival-time design");
                LfsimStatus::ValidationError
            }
        }
    })
}

/// # Safety
/// `p` must be a handle from `lfsim_design`, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn lfsim_plan_free(p: *mut LfsimPlan) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of designed arrival instants (including the start time zero).
///
/// # Safety
/// `p` must be a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn lfsim_plan_len(p: *const LfsimPlan) -> usize {
    if p.is_null() {
        return 0;
    }
    (*p).plan.times.len()
}

/// Copies the cumulative arrival times.
///
/// # Safety
/// `p` must be a live plan handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lfsim_plan_times(
    p: *const LfsimPlan,
    buf: *mut f64,
    len: usize,
) -> LfsimStatus {
    guard(|| {
        if p.is_null() {
            set_error("null plan handle");
            return LfsimStatus::NullArgument;
        }
        copy_slice(&(*p).plan.times, buf, len)
    })
}
