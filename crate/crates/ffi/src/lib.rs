//! C ABI over the design library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_design_*` functions and released by the matching `*_free`. Every
//! fallible call returns an [`AfdmStatus`]; on failure a message for the
//! calling thread is available through [`afdm_last_error_message`].
//! Complex arrays are interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use afdm::baselines::{conventional_afdm, gps_sweep};
use afdm::metrics::{papr_of_samples, AfKernel};
use afdm::optimizer::{run_jipd_mm, Mode, OptimizerOptions, VariableSet};
use afdm::{AfdmConfig, AfdmError, DesignVector, LazSpec, ModulationMatrices, SubcarrierPartition};
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Dimension = 4,
    BufferTooSmall = 5,
    Runtime = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfdmMode {
    AfShape = 0,
    PaprMin = 1,
    Joint = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfdmVariables {
    RcsOnly = 0,
    RcsPlusPrechirp = 1,
}

/// System configuration with its precomputed operators and the default zone.
pub struct AfdmSystem {
    cfg: AfdmConfig,
    mm: ModulationMatrices,
    laz: LazSpec,
}

/// A designed waveform bound to the system it was designed for.
pub struct AfdmDesign {
    cfg: AfdmConfig,
    mm: ModulationMatrices,
    laz: LazSpec,
    design: DesignVector,
    iterations: usize,
    feasible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &AfdmError) -> AfdmStatus {
    match e {
        AfdmError::Config(_) => AfdmStatus::Config,
        AfdmError::Dimension { .. } => AfdmStatus::Dimension,
        _ => AfdmStatus::Runtime,
    }
}

/// Run `f`, translating library errors and panics into status codes.
fn guard<F>(f: F) -> AfdmStatus
where
    F: FnOnce() -> Result<(), (AfdmStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfdmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AfdmStatus::Panic
        }
    }
}

fn lib<T>(r: afdm::Result<T>) -> Result<T, (AfdmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AfdmStatus, String) {
    (AfdmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (AfdmStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn write_complex(src: &[Complex64], out: *mut f64, capacity: usize, written: *mut usize) -> Result<(), (AfdmStatus, String)> {
    if !written.is_null() {
        // SAFETY: checked non-null; caller provides a valid usize slot.
        unsafe { *written = src.len() };
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if capacity < src.len() {
        return Err((AfdmStatus::BufferTooSmall, format!("need {} complex values, buffer holds {capacity}", src.len())));
    }
    // SAFETY: out has room for 2 * capacity doubles per the contract.
    let dst = unsafe { std::slice::from_raw_parts_mut(out, 2 * src.len()) };
    for (pair, z) in dst.chunks_exact_mut(2).zip(src) {
        pair[0] = z.re;
        pair[1] = z.im;
    }
    Ok(())
}

fn boxed_system(cfg: AfdmConfig) -> Result<*mut AfdmSystem, (AfdmStatus, String)> {
    let mm = lib(ModulationMatrices::new(&cfg))?;
    let laz = LazSpec::default();
    if 2 * laz.tau_max >= cfg.n {
        return Err((AfdmStatus::Config, format!("N={} too small for the default zone", cfg.n)));
    }
    Ok(Box::into_raw(Box::new(AfdmSystem { cfg, mm, laz })))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn afdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn afdm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Reference system (N = 128, 8PSK, octagonal alphabet, 4x oversampling)
/// with a comb of reserved subcarriers covering `rcs_ratio` of the band.
///
/// # Safety
/// `out` must point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn afdm_system_new_reference(rcs_ratio: f64, out: *mut *mut AfdmSystem) -> AfdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = lib(AfdmConfig::reference(rcs_ratio))?;
        *out = boxed_system(cfg)?;
        Ok(())
    })
}

/// Custom system. `reserved` lists `reserved_len` reserved subcarrier indices
/// and may be null when `reserved_len` is zero.
///
/// # Safety
/// `reserved` must point to `reserved_len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afdm_system_new(
    n: usize,
    c1: f64,
    oversampling: usize,
    reserved: *const usize,
    reserved_len: usize,
    out: *mut *mut AfdmSystem,
) -> AfdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let idx: &[usize] = if reserved_len == 0 {
            &[]
        } else if reserved.is_null() {
            return Err(null("reserved"));
        } else {
            std::slice::from_raw_parts(reserved, reserved_len)
        };
        let part = lib(SubcarrierPartition::new(n, idx))?;
        let mut cfg = lib(AfdmConfig::new(n, c1, part))?;
        cfg.oversampling = oversampling;
        lib(cfg.validate())?;
        *out = boxed_system(cfg)?;
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from `afdm_system_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afdm_system_free(sys: *mut AfdmSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Subcarrier count, oversampling factor and number of reserved subcarriers.
///
/// # Safety
/// `sys` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn afdm_system_dims(
    sys: *const AfdmSystem,
    n: *mut usize,
    oversampling: *mut usize,
    reserved: *mut usize,
) -> AfdmStatus {
    guard(|| {
        let s = get(sys, "system")?;
        if !n.is_null() {
            *n = s.cfg.n;
        }
        if !oversampling.is_null() {
            *oversampling = s.cfg.oversampling;
        }
        if !reserved.is_null() {
            *reserved = s.cfg.partition.reserved().len();
        }
        Ok(())
    })
}

fn wrap_design(s: &AfdmSystem, design: DesignVector, iterations: usize, feasible: bool) -> *mut AfdmDesign {
    Box::into_raw(Box::new(AfdmDesign {
        cfg: s.cfg.clone(),
        mm: s.mm.clone(),
        laz: s.laz.clone(),
        design,
        iterations,
        feasible,
    }))
}

/// Conventional waveform with random symbols drawn from `seed`.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_conventional(sys: *const AfdmSystem, seed: u64, out: *mut *mut AfdmDesign) -> AfdmStatus {
    guard(|| {
        let s = get(sys, "system")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = wrap_design(s, conventional_afdm(&s.cfg, seed), 0, true);
        Ok(())
    })
}

/// Greedy pre-chirp sweep starting from the conventional waveform of `seed`.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_gps(sys: *const AfdmSystem, seed: u64, out: *mut *mut AfdmDesign) -> AfdmStatus {
    guard(|| {
        let s = get(sys, "system")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = lib(gps_sweep(&s.cfg, &s.mm, &conventional_afdm(&s.cfg, seed)))?;
        *out = wrap_design(s, d, 0, true);
        Ok(())
    })
}

/// Optimize from the conventional waveform of `seed`. `gamma_db` is used by
/// the joint mode; `r_max` of zero keeps the default iteration budget.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_optimize(
    sys: *const AfdmSystem,
    seed: u64,
    mode: AfdmMode,
    variables: AfdmVariables,
    gamma_db: f64,
    r_max: usize,
    out: *mut *mut AfdmDesign,
) -> AfdmStatus {
    guard(|| {
        let s = get(sys, "system")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match mode {
            AfdmMode::AfShape => Mode::AfShape,
            AfdmMode::PaprMin => Mode::PaprMin,
            AfdmMode::Joint => Mode::Joint,
        };
        let vars = match variables {
            AfdmVariables::RcsOnly => VariableSet::RcsOnly,
            AfdmVariables::RcsPlusPrechirp => VariableSet::RcsPlusPrechirp,
        };
        let mut opts = OptimizerOptions::new(mode, vars);
        opts.gamma_db = gamma_db;
        if r_max > 0 {
            opts.r_max = r_max;
        }
        let res = lib(run_jipd_mm(&s.cfg, &s.laz, &conventional_afdm(&s.cfg, seed), &opts))?;
        *out = wrap_design(s, res.design, res.iterations, res.feasible);
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a live design handle.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_free(d: *mut AfdmDesign) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Transmit samples: N at symbol rate, or N * L_P when `oversampled` is true.
/// `written` receives the required count even when the buffer is too small.
///
/// # Safety
/// `out` must hold `2 * capacity` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_samples(
    d: *const AfdmDesign,
    oversampled: bool,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> AfdmStatus {
    guard(|| {
        let d = get(d, "design")?;
        let v = d.design.effective(&d.cfg);
        let s = if oversampled { lib(d.mm.synthesize_oversampled(&v))? } else { lib(d.mm.synthesize(&v))? };
        write_complex(&s, out, capacity, written)
    })
}

/// The design vector u (length N).
///
/// # Safety
/// As for [`afdm_design_samples`].
#[no_mangle]
pub unsafe extern "C" fn afdm_design_vector(d: *const AfdmDesign, out: *mut f64, capacity: usize, written: *mut usize) -> AfdmStatus {
    guard(|| {
        let d = get(d, "design")?;
        write_complex(&d.design.u, out, capacity, written)
    })
}

/// Weighted ISL over the default zone and oversampled PAPR in dB.
///
/// # Safety
/// `d` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_metrics(d: *const AfdmDesign, isl: *mut f64, papr_db: *mut f64) -> AfdmStatus {
    guard(|| {
        let d = get(d, "design")?;
        let v = d.design.effective(&d.cfg);
        if !isl.is_null() {
            let k = lib(AfKernel::new(d.cfg.n, &d.laz))?;
            *isl = k.weighted_isl(&lib(d.mm.synthesize(&v))?);
        }
        if !papr_db.is_null() {
            *papr_db = lib(papr_of_samples(&lib(d.mm.synthesize_oversampled(&v))?))?.db;
        }
        Ok(())
    })
}

/// Iterations used and whether the PAPR target was met (always true outside
/// the joint mode).
///
/// # Safety
/// `d` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn afdm_design_status(d: *const AfdmDesign, iterations: *mut usize, feasible: *mut bool) -> AfdmStatus {
    guard(|| {
        let d = get(d, "design")?;
        if !iterations.is_null() {
            *iterations = d.iterations;
        }
        if !feasible.is_null() {
            *feasible = d.feasible;
        }
        Ok(())
    })
}

/// PAPR in dB of `count` interleaved complex samples.
///
/// # Safety
/// `samples` must hold `2 * count` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn afdm_papr_db(samples: *const f64, count: usize, out: *mut f64) -> AfdmStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if count == 0 {
            return Err((AfdmStatus::InvalidArgument, "no samples".into()));
        }
        let raw = std::slice::from_raw_parts(samples, 2 * count);
        let s: Vec<Complex64> = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        *out = lib(papr_of_samples(&s))?.db;
        Ok(())
    })
}

/// Human-readable name of a status code, as a static string.
#[no_mangle]
pub extern "C" fn afdm_status_name(status: AfdmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        AfdmStatus::Ok => c"ok",
        AfdmStatus::NullPointer => c"null pointer",
        AfdmStatus::InvalidArgument => c"invalid argument",
        AfdmStatus::Config => c"configuration error",
        AfdmStatus::Dimension => c"dimension mismatch",
        AfdmStatus::BufferTooSmall => c"buffer too small",
        AfdmStatus::Runtime => c"runtime failure",
        AfdmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
