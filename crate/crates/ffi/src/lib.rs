//! C API for guessga.
//!
//! Objects are opaque heap handles created by `*_new` / `*_run_*` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`GuessgaStatus`]; on failure a message is available from
//! [`guessga_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use libc::c_char;

use guessga::experiment::{self, BatchResult};
use guessga::{Config, Error, PayoffModel, SweepResult};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessgaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Runtime = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessgaPayoff {
    Quadratic = 0,
    WinnerTakeAll = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GuessgaSweepPoint {
    pub axis_value: f64,
    pub mean_final: f64,
    pub variance_final: f64,
    pub n_trials: usize,
}

/// Opaque run configuration.
pub struct GuessgaConfig {
    inner: Config,
}

/// Opaque result of a batch of trials.
pub struct GuessgaBatch {
    inner: BatchResult,
}

/// Opaque result of a q-sweep.
pub struct GuessgaSweep {
    inner: SweepResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> GuessgaStatus {
    match err {
        Error::Io { .. } => GuessgaStatus::Io,
        Error::InvalidParameter { .. }
        | Error::InsufficientBeliefs(_)
        | Error::NoNashReference(_)
        | Error::Validation(_)
        | Error::Manifest { .. } => GuessgaStatus::InvalidArgument,
        _ => GuessgaStatus::Runtime,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), GuessgaStatusError>) -> GuessgaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GuessgaStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.message);
            e.status
        }
        Err(_) => {
            set_last_error("panic inside guessga");
            GuessgaStatus::Panic
        }
    }
}

struct GuessgaStatusError {
    status: GuessgaStatus,
    message: String,
}

impl From<Error> for GuessgaStatusError {
    fn from(e: Error) -> Self {
        Self {
            status: status_of(&e),
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> GuessgaStatusError {
    GuessgaStatusError {
        status: GuessgaStatus::NullPointer,
        message: format!("null pointer: {what}"),
    }
}

fn invalid(message: impl Into<String>) -> GuessgaStatusError {
    GuessgaStatusError {
        status: GuessgaStatus::InvalidArgument,
        message: message.into(),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GuessgaStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(
    p: *const f64,
    len: usize,
    what: &str,
) -> Result<&'a [f64], GuessgaStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn config_ref<'a>(
    cfg: *const GuessgaConfig,
) -> Result<&'a GuessgaConfig, GuessgaStatusError> {
    cfg.as_ref().ok_or_else(|| null("config"))
}

/// Applies `edit` to a copy of the config and keeps it only if it validates.
unsafe fn edit_config(cfg: *mut GuessgaConfig, edit: impl FnOnce(&mut Config)) -> GuessgaStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let mut next = cfg.inner.clone();
        edit(&mut next);
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn guessga_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn guessga_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `-(x - p * xbar)^2`.
#[no_mangle]
pub extern "C" fn guessga_quadratic_payoff(x: f64, p: f64, xbar: f64) -> f64 {
    guessga::env::quadratic_payoff(x, p, xbar)
}

/// Quadratic fitness of `pool[idx]` against the other `len - 1` members.
///
/// # Safety
/// `pool` must point to `len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn guessga_quadratic_fitness(
    pool: *const f64,
    len: usize,
    idx: usize,
    p: f64,
    out: *mut f64,
) -> GuessgaStatus {
    guard(|| {
        let pool = slice_arg(pool, len, "pool")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = guessga::env::quadratic_fitness(pool, idx, p)?;
        Ok(())
    })
}

/// Winner-take-all fitness of every pool member.
///
/// # Safety
/// `pool` must point to `len` doubles and `out` to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn guessga_winner_take_all_fitness(
    pool: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> GuessgaStatus {
    guard(|| {
        let pool = slice_arg(pool, len, "pool")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let fitness = guessga::env::winner_take_all_fitness(pool, p)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&fitness);
        Ok(())
    })
}

/// New config holding the built-in defaults.
#[no_mangle]
pub extern "C" fn guessga_config_new() -> *mut GuessgaConfig {
    Box::into_raw(Box::new(GuessgaConfig {
        inner: Config::default(),
    }))
}

/// Parses a JSON config (any subset of fields, or a whole run manifest).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_from_json(
    json: *const c_char,
    out: *mut *mut GuessgaConfig,
) -> GuessgaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let inner = Config::from_json(text)?;
        *out = Box::into_raw(Box::new(GuessgaConfig { inner }));
        Ok(())
    })
}

/// Serializes the config as canonical JSON. Free the result with
/// [`guessga_string_free`].
///
/// # Safety
/// `cfg` must be a live config handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_to_json(cfg: *const GuessgaConfig) -> *mut c_char {
    match config_ref(cfg) {
        Ok(c) => CString::new(c.inner.to_canonical_json())
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        Err(e) => {
            set_last_error(e.message);
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from a guessga function returning an owned string, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_free(cfg: *mut GuessgaConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_q(cfg: *mut GuessgaConfig, q: f64) -> GuessgaStatus {
    edit_config(cfg, |c| c.env.q = q)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_iterations(
    cfg: *mut GuessgaConfig,
    iterations: usize,
) -> GuessgaStatus {
    if iterations == 0 {
        set_last_error("invalid parameter `iterations`: must be at least 1");
        return GuessgaStatus::InvalidArgument;
    }
    edit_config(cfg, |c| c.iterations = iterations)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_n_trials(
    cfg: *mut GuessgaConfig,
    n_trials: usize,
) -> GuessgaStatus {
    edit_config(cfg, |c| c.n_trials = n_trials)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_seed(
    cfg: *mut GuessgaConfig,
    seed: u64,
) -> GuessgaStatus {
    edit_config(cfg, |c| c.seed = seed)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_pool_size(
    cfg: *mut GuessgaConfig,
    pool_size: usize,
) -> GuessgaStatus {
    edit_config(cfg, |c| c.ga.pool_size = pool_size)
}

/// Mutation probability.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_rho(
    cfg: *mut GuessgaConfig,
    rho: f64,
) -> GuessgaStatus {
    edit_config(cfg, |c| c.ga.mutation_prob = rho)
}

/// Mutation step.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_epsilon(
    cfg: *mut GuessgaConfig,
    epsilon: f64,
) -> GuessgaStatus {
    edit_config(cfg, |c| c.ga.mutation_step = epsilon)
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn guessga_config_set_payoff(
    cfg: *mut GuessgaConfig,
    payoff: GuessgaPayoff,
) -> GuessgaStatus {
    let model = match payoff {
        GuessgaPayoff::Quadratic => PayoffModel::QuadraticLoss,
        GuessgaPayoff::WinnerTakeAll => PayoffModel::WinnerTakeAll,
    };
    edit_config(cfg, |c| c.ga.payoff_model = model)
}

/// Runs `n_trials` seeded trials at the configured q.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn guessga_run_batch(
    cfg: *const GuessgaConfig,
    out: *mut *mut GuessgaBatch,
) -> GuessgaStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = experiment::run_batch(&cfg.inner.batch())?;
        *out = Box::into_raw(Box::new(GuessgaBatch { inner }));
        Ok(())
    })
}

/// # Safety
/// `batch` must be a live batch handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_mean_final(
    batch: *const GuessgaBatch,
    out: *mut f64,
) -> GuessgaStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = b.inner.mean_final;
        Ok(())
    })
}

/// Population variance of the per-trial final means.
///
/// # Safety
/// `batch` must be a live batch handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_variance_final(
    batch: *const GuessgaBatch,
    out: *mut f64,
) -> GuessgaStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = b.inner.variance_final;
        Ok(())
    })
}

/// Number of trials, or 0 for a NULL handle.
///
/// # Safety
/// `batch` must be a live batch handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_n_trials(batch: *const GuessgaBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.inner.trials.len())
}

/// Number of iterations per trial, or 0 for a NULL handle.
///
/// # Safety
/// `batch` must be a live batch handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_iterations(batch: *const GuessgaBatch) -> usize {
    batch
        .as_ref()
        .and_then(|b| b.inner.trials.first())
        .map_or(0, |t| t.trajectory.len())
}

/// Copies each trial's final mean strategy into `buf` (`len >= n_trials`).
///
/// # Safety
/// `batch` must be a live batch handle and `buf` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_final_means(
    batch: *const GuessgaBatch,
    buf: *mut f64,
    len: usize,
) -> GuessgaStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = b.inner.trials.len();
        if len < n {
            return Err(invalid(format!("buffer holds {len} values, need {n}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n);
        for (d, t) in dst.iter_mut().zip(&b.inner.trials) {
            *d = t.final_mean;
        }
        Ok(())
    })
}

/// Cross-trial mean of the pool mean at each iteration (`len >= iterations`).
///
/// # Safety
/// `batch` must be a live batch handle and `buf` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_mean_trajectory(
    batch: *const GuessgaBatch,
    buf: *mut f64,
    len: usize,
) -> GuessgaStatus {
    guard(|| {
        let b = batch.as_ref().ok_or_else(|| null("batch"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let iterations = b.inner.trials.first().map_or(0, |t| t.trajectory.len());
        if len < iterations {
            return Err(invalid(format!(
                "buffer holds {len} values, need {iterations}"
            )));
        }
        let n = b.inner.trials.len() as f64;
        let dst = std::slice::from_raw_parts_mut(buf, iterations);
        for (t, d) in dst.iter_mut().enumerate() {
            *d = b
                .inner
                .trials
                .iter()
                .map(|tr| tr.trajectory[t].pool_mean)
                .sum::<f64>()
                / n;
        }
        Ok(())
    })
}

/// # Safety
/// `batch` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn guessga_batch_free(batch: *mut GuessgaBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// One batch per q value. `q_values` may be NULL with `len == 0` to use the
/// config's q-grid.
///
/// # Safety
/// `cfg` must be a live config handle, `q_values` point to `len` doubles
/// (or be NULL with `len == 0`), and `out` be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn guessga_sweep_q(
    cfg: *const GuessgaConfig,
    q_values: *const f64,
    len: usize,
    out: *mut *mut GuessgaSweep,
) -> GuessgaStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = if q_values.is_null() && len == 0 {
            cfg.inner.q_grid.clone()
        } else {
            slice_arg(q_values, len, "q_values")?.to_vec()
        };
        let inner = experiment::sweep_q(&grid, &cfg.inner.batch())?;
        *out = Box::into_raw(Box::new(GuessgaSweep { inner }));
        Ok(())
    })
}

/// Number of points, or 0 for a NULL handle.
///
/// # Safety
/// `sweep` must be a live sweep handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_sweep_len(sweep: *const GuessgaSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.inner.points.len())
}

/// Point `idx` in ascending axis order.
///
/// # Safety
/// `sweep` must be a live sweep handle and `out` a writable point.
#[no_mangle]
pub unsafe extern "C" fn guessga_sweep_point(
    sweep: *const GuessgaSweep,
    idx: usize,
    out: *mut GuessgaSweepPoint,
) -> GuessgaStatus {
    guard(|| {
        let s = sweep.as_ref().ok_or_else(|| null("sweep"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let pt = s
            .inner
            .points
            .get(idx)
            .ok_or_else(|| invalid(format!("index {idx} out of range")))?;
        *out = GuessgaSweepPoint {
            axis_value: pt.axis_value,
            mean_final: pt.mean_final,
            variance_final: pt.variance_final,
            n_trials: pt.n_trials,
        };
        Ok(())
    })
}

/// Writes the sweep as CSV to `path`.
///
/// # Safety
/// `sweep` must be a live sweep handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn guessga_sweep_write_csv(
    sweep: *const GuessgaSweep,
    path: *const c_char,
) -> GuessgaStatus {
    guard(|| {
        let s = sweep.as_ref().ok_or_else(|| null("sweep"))?;
        let path = str_arg(path, "path")?;
        guessga::report::write_sweep_csv(&s.inner, Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `sweep` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn guessga_sweep_free(sweep: *mut GuessgaSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Re-runs the experiment recorded in a manifest. `out_dir` may be NULL to
/// use the directory recorded in the manifest.
///
/// # Safety
/// `manifest` must be a NUL-terminated string; `out_dir` one or NULL.
#[no_mangle]
pub unsafe extern "C" fn guessga_rerun_manifest(
    manifest: *const c_char,
    out_dir: *const c_char,
) -> GuessgaStatus {
    guard(|| {
        let manifest = str_arg(manifest, "manifest")?;
        let out_dir = if out_dir.is_null() {
            None
        } else {
            Some(PathBuf::from(str_arg(out_dir, "out_dir")?))
        };
        guessga::run::rerun(Path::new(manifest), out_dir.as_deref())?;
        Ok(())
    })
}
