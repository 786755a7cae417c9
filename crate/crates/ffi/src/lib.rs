//! C ABI over `statgamma`.
//!
//! Every entry point returns an [`SgStatus`] (or a plain number for the
//! infallible special functions), never unwinds across the boundary, and
//! leaves a message for [`sg_last_error`] on failure. Ensembles are opaque
//! handles released with [`sg_ensemble_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use statgamma::analytic::{self, TestFunction};
use statgamma::{
    simulate_ensemble, CirMethod, CthinConfig, Dependence, Ensemble, Error, GammaParams, ProcessKind, SimOptions,
    Start, TimeGrid,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    InvalidArgument = 1,
    Unsupported = 2,
    Numerical = 3,
    NullPointer = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Values accepted wherever a process kind is expected.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgProcess {
    Ar1 = 0,
    Thinned = 1,
    RandomMeasure = 2,
    ChangePoint = 3,
    SquaredOu = 4,
    ContinuouslyThinned = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgCirMethod {
    Exact = 0,
    Euler = 1,
    SquaredOu = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgTestFunction {
    Identity = 0,
    Square = 1,
    Exponential = 2,
}

/// Simulation options; start from [`sg_sim_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgSimOptions {
    /// One of `SgCirMethod`.
    pub cir_method: u32,
    /// Longest substep for the Euler and squared-OU methods.
    pub dt_sub: f64,
    pub cthin_steps_per_unit_time: u32,
    /// Nonzero: every path starts at `start_value` instead of a stationary draw.
    pub fixed_start: u8,
    pub start_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgComplex {
    pub re: f64,
    pub im: f64,
}

/// Simulated ensemble, row-major `n_paths x n_times`.
pub struct SgEnsemble {
    inner: Ensemble,
}

struct Failure {
    status: SgStatus,
    message: String,
}

impl Failure {
    fn new(status: SgStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn null(what: &str) -> Self {
        Self::new(SgStatus::NullPointer, format!("{what} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parameter(_) => SgStatus::InvalidArgument,
            Error::Unsupported(_) => SgStatus::Unsupported,
            Error::Numerical(_) | Error::Io(_) => SgStatus::Numerical,
        };
        Self::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guarded<F: FnOnce() -> Result<(), Failure>>(f: F) -> SgStatus {
    set_last_error("");
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(_) => {
            set_last_error("internal panic");
            SgStatus::Panic
        }
    }
}

fn process_kind(code: u32) -> Result<ProcessKind, Failure> {
    const KINDS: [ProcessKind; 6] = [
        ProcessKind::Ar1,
        ProcessKind::Thinned,
        ProcessKind::RandomMeasure,
        ProcessKind::ChangePoint,
        ProcessKind::SquaredOU,
        ProcessKind::ContinuouslyThinned,
    ];
    KINDS
        .get(code as usize)
        .copied()
        .ok_or_else(|| Failure::new(SgStatus::OutOfRange, format!("unknown process code {code}")))
}

fn model(alpha: f64, beta: f64, rho: f64) -> Result<(GammaParams, Dependence), Failure> {
    Ok((GammaParams::new(alpha, beta)?, Dependence::from_rho(rho)?))
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    // SAFETY: non-null and, by contract, valid for one write of T.
    unsafe { out.write(value) };
    Ok(())
}

fn sim_options(o: &SgSimOptions) -> Result<SimOptions, Failure> {
    let cir_method = match o.cir_method {
        0 => CirMethod::Exact,
        1 => CirMethod::Euler { dt_sub: o.dt_sub },
        2 => CirMethod::SquaredOU { dt_sub: o.dt_sub },
        other => return Err(Failure::new(SgStatus::OutOfRange, format!("unknown cir method code {other}"))),
    };
    if o.cir_method != 0 && !(o.dt_sub.is_finite() && o.dt_sub > 0.0) {
        return Err(Failure::new(SgStatus::InvalidArgument, format!("dt_sub must be positive, got {}", o.dt_sub)));
    }
    let start = if o.fixed_start != 0 { Start::Fixed(o.start_value) } else { Start::Stationary };
    Ok(SimOptions { cir_method, cthin: CthinConfig::new(o.cthin_steps_per_unit_time)?, start })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on this thread, or an empty
/// string. Valid until the next `sg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn sg_sim_options_default() -> SgSimOptions {
    SgSimOptions {
        cir_method: SgCirMethod::Exact as u32,
        dt_sub: 1.0 / 64.0,
        cthin_steps_per_unit_time: CthinConfig::default().steps_per_unit_time(),
        fixed_start: 0,
        start_value: 0.0,
    }
}

/// Simulate `n_paths` paths of process `kind` observed at `times[0..n_times]`.
/// `options` may be null for defaults. On success `*out` owns a new handle.
///
/// # Safety
/// `times` must point to `n_times` readable doubles, `options` must be null
/// or valid, and `out` must be valid for one pointer write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sg_simulate(
    kind: u32,
    alpha: f64,
    beta: f64,
    rho: f64,
    times: *const f64,
    n_times: usize,
    n_paths: usize,
    seed: u64,
    options: *const SgSimOptions,
    out: *mut *mut SgEnsemble,
) -> SgStatus {
    guarded(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        // SAFETY: checked non-null above.
        unsafe { out.write(ptr::null_mut()) };
        if times.is_null() {
            return Err(Failure::null("times"));
        }
        let kind = process_kind(kind)?;
        let (p, dep) = model(alpha, beta, rho)?;
        // SAFETY: caller guarantees `n_times` readable values.
        let times = unsafe { std::slice::from_raw_parts(times, n_times) }.to_vec();
        let grid = TimeGrid::new(times)?;
        let opts = if options.is_null() {
            SimOptions::default()
        } else {
            // SAFETY: non-null and valid by contract.
            sim_options(unsafe { &*options })?
        };
        let inner = simulate_ensemble(kind, &grid, p, dep, n_paths, seed, &opts)?;
        // SAFETY: checked non-null above.
        unsafe { out.write(Box::into_raw(Box::new(SgEnsemble { inner }))) };
        Ok(())
    })
}

/// Release a handle from [`sg_simulate`]. Null is ignored.
///
/// # Safety
/// `ensemble` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_ensemble_free(ensemble: *mut SgEnsemble) {
    if !ensemble.is_null() {
        // SAFETY: created by Box::into_raw in sg_simulate and freed once.
        let _ = panic::catch_unwind(AssertUnwindSafe(|| drop(unsafe { Box::from_raw(ensemble) })));
    }
}

/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_ensemble_n_paths(ensemble: *const SgEnsemble) -> usize {
    // SAFETY: null or live by contract.
    unsafe { ensemble.as_ref() }.map_or(0, |e| e.inner.n_paths())
}

/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_ensemble_n_times(ensemble: *const SgEnsemble) -> usize {
    // SAFETY: null or live by contract.
    unsafe { ensemble.as_ref() }.map_or(0, |e| e.inner.n_times())
}

/// Row-major values, `n_paths * n_times` doubles, owned by the handle.
///
/// # Safety
/// `ensemble` must be null or a live handle; the pointer dies with it.
#[no_mangle]
pub unsafe extern "C" fn sg_ensemble_values(ensemble: *const SgEnsemble) -> *const f64 {
    // SAFETY: null or live by contract.
    unsafe { ensemble.as_ref() }.map_or(ptr::null(), |e| e.inner.values().as_ptr())
}

/// Copy path `m` into `out[0..len]`; `len` must be at least `n_times`.
///
/// # Safety
/// `ensemble` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sg_ensemble_copy_path(
    ensemble: *const SgEnsemble,
    m: usize,
    out: *mut f64,
    len: usize,
) -> SgStatus {
    guarded(|| {
        // SAFETY: null or live by contract.
        let e = unsafe { ensemble.as_ref() }.ok_or_else(|| Failure::null("ensemble"))?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        if m >= e.inner.n_paths() {
            return Err(Failure::new(SgStatus::OutOfRange, format!("path {m} of {}", e.inner.n_paths())));
        }
        let path = e.inner.path(m);
        if len < path.len() {
            return Err(Failure::new(SgStatus::OutOfRange, format!("buffer of {len} for {} values", path.len())));
        }
        // SAFETY: `out` holds at least `len >= path.len()` doubles.
        unsafe { ptr::copy_nonoverlapping(path.as_ptr(), out, path.len()) };
        Ok(())
    })
}

/// Characteristic function of Ga(alpha, beta) at `omega`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sg_gamma_chf(omega: f64, alpha: f64, beta: f64, out: *mut SgComplex) -> SgStatus {
    guarded(|| {
        let p = GammaParams::new(alpha, beta)?;
        let z = analytic::gamma_chf(omega, p);
        write_out(out, SgComplex { re: z.re, im: z.im }, "out")
    })
}

/// Joint chf `E exp(i (s X_0 + t X_1))` of two observations one time unit
/// apart, unit-lag correlation `rho`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sg_pair_chf(
    kind: u32,
    s: f64,
    t: f64,
    alpha: f64,
    beta: f64,
    rho: f64,
    out: *mut SgComplex,
) -> SgStatus {
    guarded(|| {
        let kind = process_kind(kind)?;
        let (p, dep) = model(alpha, beta, rho)?;
        let z = analytic::pair_chf(kind, s, t, p, dep)?;
        write_out(out, SgComplex { re: z.re, im: z.im }, "out")
    })
}

/// Density of `X_{t+dt} = y` given `X_t = x` for the square-root diffusion.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sg_cir_transition_density(
    y: f64,
    x: f64,
    dt: f64,
    alpha: f64,
    beta: f64,
    rho: f64,
    out: *mut f64,
) -> SgStatus {
    guarded(|| {
        let (p, dep) = model(alpha, beta, rho)?;
        write_out(out, analytic::cir_transition_density(y, x, dt, p, dep)?, "out")
    })
}

/// Generator of `kind` (squared OU or continuously thinned) applied to a
/// test function at `x`. `theta` is read only for the exponential.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sg_generator_apply(
    kind: u32,
    phi: u32,
    theta: f64,
    x: f64,
    alpha: f64,
    beta: f64,
    rho: f64,
    out: *mut f64,
) -> SgStatus {
    guarded(|| {
        let kind = process_kind(kind)?;
        let phi = match phi {
            0 => TestFunction::Identity,
            1 => TestFunction::Square,
            2 => TestFunction::exponential(theta)?,
            other => return Err(Failure::new(SgStatus::OutOfRange, format!("unknown test function code {other}"))),
        };
        let (p, dep) = model(alpha, beta, rho)?;
        write_out(out, analytic::generator_apply(kind, phi, x, p, dep)?, "out")
    })
}

/// `P[X > u]` for `X ~ Ga(alpha, beta)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sg_gamma_survival(u: f64, alpha: f64, beta: f64, out: *mut f64) -> SgStatus {
    guarded(|| {
        let p = GammaParams::new(alpha, beta)?;
        write_out(out, analytic::gamma_survival(u, p), "out")
    })
}

/// `ln I_q(x)`; NaN outside the domain.
#[no_mangle]
pub extern "C" fn sg_log_bessel_i(q: f64, x: f64) -> f64 {
    panic::catch_unwind(|| statgamma::special::log_bessel_i(q, x)).unwrap_or(f64::NAN)
}
