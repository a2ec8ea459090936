//! C ABI over the `slitwall` core.
//!
//! Every fallible call returns an [`SwStatus`]. On failure the message is
//! kept per thread and read back with [`sw_last_error_message`]. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Buffers follow one convention: pass the
//! capacity in `len`, the function stores the required count in `*needed`
//! and returns `SW_BUFFER_TOO_SMALL` if the buffer is short (a null buffer
//! with `len == 0` is a size query).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use slitwall::config::read_config;
use slitwall::observables::AuditStatus;
use slitwall::recoil::{recoil_velocity, RecoilScenario};
use slitwall::runner::ArtifactWriter;
use slitwall::sweep::CellStatus;
use slitwall::{
    build_state, conditional_momentum, kennard_audit, parse_config, run_pipeline, run_sweep,
    screen_distribution, visibility, BranchPair, Error, GridSpec, Scenario, StateSpec,
    SweepResult, WaveFunction,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    GridTooSmall = 4,
    GridTooCoarse = 5,
    Numerical = 6,
    Io = 7,
    Internal = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for SwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ContractViolation(_) => SwStatus::InvalidArgument,
            Error::Config(_) => SwStatus::Config,
            Error::GridTooSmall(_) => SwStatus::GridTooSmall,
            Error::GridTooCoarse(_) => SwStatus::GridTooCoarse,
            Error::Numerical(_) | Error::OutcomeUnreachable { .. } => SwStatus::Numerical,
            Error::Io { .. } => SwStatus::Io,
            Error::InternalConsistency(_) => SwStatus::Internal,
        }
    }
}

/// Opaque single-particle state on a grid.
pub struct SwWaveFunction(WaveFunction);

/// Opaque validated scenario.
pub struct SwScenario(Scenario);

/// Opaque result of running a scenario's pipeline.
pub struct SwBranchPair(BranchPair);

/// Opaque parameter-sweep result.
pub struct SwSweepResult {
    result: SweepResult,
    config_hash: String,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwVisibility {
    pub visibility: f64,
    pub phase_alpha: f64,
    pub applied_k: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwKennard {
    pub sigma_q: f64,
    pub sigma_p: f64,
    pub product: f64,
    /// 0 satisfied, 1 violated, 2 moments unresolved.
    pub status: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwSweepRow {
    pub param: f64,
    pub sigma_q: f64,
    pub delta_p_support: f64,
    pub uncertainty_product: f64,
    pub visibility: f64,
    pub accuracy: f64,
    pub accuracy_exact: f64,
    /// 0 ok, 1 moments unresolved, 2 Kennard violated, 3 failed.
    pub status: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SwStatus, msg: impl Into<String>) -> SwStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SwStatus {
    let status = SwStatus::from(&e);
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SwStatus) -> SwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SwStatus::Panic, "panic inside slitwall"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SwStatus> {
    if p.is_null() {
        return Err(fail(SwStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SwStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn fill(values: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> SwStatus {
    if !needed.is_null() {
        *needed = values.len();
    }
    if len < values.len() {
        if buf.is_null() && len == 0 {
            return SwStatus::BufferTooSmall;
        }
        return fail(
            SwStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        );
    }
    if buf.is_null() {
        return fail(SwStatus::NullPointer, "buffer is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    SwStatus::Ok
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(SwStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! out_mut {
    ($p:expr) => {
        match $p.as_mut() {
            Some(v) => v,
            None => return fail(SwStatus::NullPointer, "out is null"),
        }
    };
}

macro_rules! try_sw {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e.into()),
        }
    };
}

unsafe fn boxed<T>(out: *mut *mut T, value: T) -> SwStatus {
    *out = Box::into_raw(Box::new(value));
    SwStatus::Ok
}

/// Library version, a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `sw_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Position-space Gaussian `exp(-(x-c)²/4σ² + i·chirp·(x-c)²/2)` on a grid
/// of `n_points` samples over `length`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_gaussian(
    length: f64,
    n_points: usize,
    center: f64,
    sigma: f64,
    chirp: f64,
    out: *mut *mut SwWaveFunction,
) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let grid = try_sw!(GridSpec::new(length, n_points));
        let spec = StateSpec::GaussianPosition { center, sigma, chirp };
        boxed(out, SwWaveFunction(try_sw!(build_state(&spec, grid))))
    })
}

/// Builds any library state from its JSON description, for example
/// `{"kind": "top_hat_momentum", "width": 1.9}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_from_json(
    length: f64,
    n_points: usize,
    json: *const c_char,
    out: *mut *mut SwWaveFunction,
) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: StateSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(SwStatus::Config, format!("state spec: {e}")),
        };
        let grid = try_sw!(GridSpec::new(length, n_points));
        boxed(out, SwWaveFunction(try_sw!(build_state(&spec, grid))))
    })
}

/// # Safety
/// `wf` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_free(wf: *mut SwWaveFunction) {
    if !wf.is_null() {
        drop(Box::from_raw(wf));
    }
}

/// Number of grid samples.
///
/// # Safety
/// `wf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_len(wf: *const SwWaveFunction) -> usize {
    wf.as_ref().map_or(0, |w| w.0.amplitudes().len())
}

/// # Safety
/// `wf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_visibility(
    wf: *const SwWaveFunction,
    k: f64,
    out: *mut SwVisibility,
) -> SwStatus {
    guard(|| {
        let wf = deref!(wf, "wavefunction");
        let out = out_mut!(out);
        let v = try_sw!(visibility(&wf.0, k));
        *out = SwVisibility {
            visibility: v.visibility,
            phase_alpha: v.phase_alpha,
            applied_k: v.applied_k,
        };
        SwStatus::Ok
    })
}

/// # Safety
/// `wf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_wavefunction_kennard(
    wf: *const SwWaveFunction,
    out: *mut SwKennard,
) -> SwStatus {
    guard(|| {
        let wf = deref!(wf, "wavefunction");
        let out = out_mut!(out);
        let a = try_sw!(kennard_audit(&wf.0));
        *out = SwKennard {
            sigma_q: a.sigma_q,
            sigma_p: a.sigma_p,
            product: a.product,
            status: match a.status {
                AuditStatus::Satisfied => 0,
                AuditStatus::Violated => 1,
                AuditStatus::MomentsUnresolved => 2,
            },
        };
        SwStatus::Ok
    })
}

/// Reads and validates a scenario file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sw_scenario_load(path: *const c_char, out: *mut *mut SwScenario) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let config = try_sw!(read_config(Path::new(path)));
        boxed(out, SwScenario(try_sw!(config.validate())))
    })
}

/// Parses and validates scenario JSON text.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sw_scenario_from_json(json: *const c_char, out: *mut *mut SwScenario) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let config = try_sw!(parse_config(text));
        boxed(out, SwScenario(try_sw!(config.validate())))
    })
}

/// Replaces the Monte Carlo seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_scenario_set_seed(scenario: *mut SwScenario, seed: u64) -> SwStatus {
    guard(|| {
        let s = match scenario.as_mut() {
            Some(s) => s,
            None => return fail(SwStatus::NullPointer, "scenario is null"),
        };
        s.0 = try_sw!(s.0.with_seed(seed));
        SwStatus::Ok
    })
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_scenario_free(scenario: *mut SwScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs free flight, slits, kicks and the final flight to the screen.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sw_scenario_run(scenario: *const SwScenario, out: *mut *mut SwBranchPair) -> SwStatus {
    guard(|| {
        let s = deref!(scenario, "scenario");
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        boxed(out, SwBranchPair(try_sw!(run_pipeline(&s.0))))
    })
}

/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_branch_pair_free(pair: *mut SwBranchPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Visibility of the initial wall state at the kick actually applied.
///
/// # Safety
/// `pair` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_branch_pair_visibility(pair: *const SwBranchPair, out: *mut SwVisibility) -> SwStatus {
    guard(|| {
        let p = deref!(pair, "branch pair");
        let out = out_mut!(out);
        let v = try_sw!(visibility(&p.0.initial_wall, p.0.applied_k));
        *out = SwVisibility {
            visibility: v.visibility,
            phase_alpha: v.phase_alpha,
            applied_k: v.applied_k,
        };
        SwStatus::Ok
    })
}

/// Normalized screen density, one value per position sample.
///
/// # Safety
/// `pair` must be a live handle, `buf` valid for `len` values, `needed`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn sw_branch_pair_screen(
    pair: *const SwBranchPair,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> SwStatus {
    guard(|| {
        let p = deref!(pair, "branch pair");
        let density = try_sw!(screen_distribution(&p.0));
        fill(&density, buf, len, needed)
    })
}

/// Wall momentum density conditioned on the particle landing at `q`.
///
/// # Safety
/// As for [`sw_branch_pair_screen`].
#[no_mangle]
pub unsafe extern "C" fn sw_branch_pair_conditional(
    pair: *const SwBranchPair,
    q: f64,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> SwStatus {
    guard(|| {
        let p = deref!(pair, "branch pair");
        let density = try_sw!(conditional_momentum(&p.0, q));
        fill(&density, buf, len, needed)
    })
}

/// Runs the scenario's configured sweep.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_run(scenario: *const SwScenario, out: *mut *mut SwSweepResult) -> SwStatus {
    guard(|| {
        let s = deref!(scenario, "scenario");
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let Some(descriptor) = s.0.sweep.as_ref() else {
            return fail(SwStatus::Config, "scenario has no sweep block");
        };
        let result = try_sw!(run_sweep(&s.0, descriptor));
        boxed(
            out,
            SwSweepResult {
                result,
                config_hash: s.0.config_hash(),
            },
        )
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_len(result: *const SwSweepResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.rows.len())
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_row(result: *const SwSweepResult, index: usize, out: *mut SwSweepRow) -> SwStatus {
    guard(|| {
        let r = deref!(result, "sweep result");
        let out = out_mut!(out);
        let Some(row) = r.result.rows.get(index) else {
            return fail(
                SwStatus::InvalidArgument,
                format!("row {index} out of range for {} rows", r.result.rows.len()),
            );
        };
        *out = SwSweepRow {
            param: row.param,
            sigma_q: row.sigma_q,
            delta_p_support: row.delta_p_support,
            uncertainty_product: row.uncertainty_product,
            visibility: row.visibility,
            accuracy: row.accuracy,
            accuracy_exact: row.accuracy_exact,
            status: match row.status {
                CellStatus::Ok => 0,
                CellStatus::MomentsUnresolved => 1,
                CellStatus::KennardViolated => 2,
                CellStatus::Failed(_) => 3,
            },
        };
        SwStatus::Ok
    })
}

/// Writes `sweep.csv` (with its metadata line) into `dir`.
///
/// # Safety
/// `result` must be a live handle and `dir` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_write_csv(result: *const SwSweepResult, dir: *const c_char) -> SwStatus {
    guard(|| {
        let r = deref!(result, "sweep result");
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let mut writer = try_sw!(ArtifactWriter::new(dir, &r.config_hash));
        try_sw!(writer.write_csv("sweep.csv", &r.result.csv_body()));
        SwStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_free(result: *mut SwSweepResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Recoil speed `2h/(Mλ)` in m/s of a target of `mass` kg that reflects a
/// photon of `wavelength` m.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_recoil_velocity(wavelength: f64, mass: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        let out = out_mut!(out);
        let s = try_sw!(RecoilScenario::new("ffi", wavelength, mass));
        *out = recoil_velocity(&s);
        SwStatus::Ok
    })
}
