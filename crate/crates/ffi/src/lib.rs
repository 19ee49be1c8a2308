//! C ABI over the `djcm` solver.
//!
//! Every function returns a [`DjcmStatus`]. On failure a message is kept per
//! thread and can be copied out with [`djcm_last_error`]. Trajectories and
//! Husimi grids are opaque handles owned by the caller and released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use djcm::dynamics::{
    solve_sector_with, time_grid, DynamicsError, InitialCondition, Method, MethodPreference, Trajectory,
};
use djcm::model::{sector_coefficients, DeformationKind, ModelParams};
use djcm::observables::{husimi_q, series_table, GridSpec, HusimiError, HusimiGrid, HusimiMode, ObservableKind};
use djcm::spectrum::{solve_cubic, theta_poly};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DjcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    ComputationFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DjcmMethod {
    Analytic = 0,
    Oracle = 1,
}

/// Time-series observables accepted by [`djcm_trajectory_observable`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DjcmObservable {
    Populations = 0,
    Inversion = 1,
    G2 = 2,
    Entropy = 3,
    MandelQ = 4,
    Squeezing = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DjcmComplex {
    pub re: f64,
    pub im: f64,
}

/// Model constants. `chi == 0` selects the undeformed oscillator.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DjcmParams {
    pub omega_cavity: f64,
    pub omega_levels: [f64; 3],
    pub g1: f64,
    pub g2: f64,
    pub omega_e: f64,
    pub chi: f64,
    pub sector_n: u32,
}

impl From<DjcmParams> for ModelParams {
    fn from(p: DjcmParams) -> Self {
        ModelParams {
            omega_cavity: p.omega_cavity,
            omega_levels: p.omega_levels,
            g1: p.g1,
            g2: p.g2,
            omega_e: p.omega_e,
            deformation: DeformationKind::from_chi(p.chi),
            sector_n: p.sector_n,
        }
    }
}

pub struct DjcmTrajectory(Trajectory);

pub struct DjcmHusimiGrid(HusimiGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(DjcmStatus, String);

impl Failure {
    fn new(status: DjcmStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        Failure(DjcmStatus::ComputationFailed, e.to_string())
    }
}

impl From<HusimiError> for Failure {
    fn from(e: HusimiError) -> Self {
        let status = match e {
            HusimiError::BadGrid => DjcmStatus::InvalidArgument,
            _ => DjcmStatus::ComputationFailed,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DjcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DjcmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DjcmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure::new(DjcmStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_slice<'a, T>(ptr: *mut T, len: usize, needed: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if ptr.is_null() {
        return Err(Failure::new(DjcmStatus::NullPointer, format!("{name} is null")));
    }
    if len < needed {
        return Err(Failure::new(
            DjcmStatus::BufferTooSmall,
            format!("{name} holds {len} elements, {needed} required"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, needed))
}

fn model(p: &DjcmParams) -> Result<ModelParams, Failure> {
    let m = ModelParams::from(*p);
    m.validate()
        .map_err(|e| Failure::new(DjcmStatus::InvalidParams, e.to_string()))?;
    Ok(m)
}

/// Version string of the library. Static, never free it.
#[no_mangle]
pub extern "C" fn djcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of the calling thread into `buf`,
/// truncated and NUL terminated. Returns the length the full message needs
/// including the terminator, 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn djcm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Fills `out` with the shared constants of the reference parameter rows
/// (sector 1).
///
/// # Safety
/// `out` must be null or point to a writable `DjcmParams`.
#[no_mangle]
pub unsafe extern "C" fn djcm_params_reference(
    omega_e: f64,
    g1: f64,
    g2: f64,
    chi: f64,
    out: *mut DjcmParams,
) -> DjcmStatus {
    guard(|| {
        let out = out_slice(out, 1, 1, "out")?;
        out[0] = DjcmParams {
            omega_cavity: 0.2,
            omega_levels: [0.3, 0.4, 0.5],
            g1,
            g2,
            omega_e,
            chi,
            sector_n: 1,
        };
        Ok(())
    })
}

/// Roots of the characteristic cubic, ascending by imaginary part.
///
/// # Safety
/// `params` must point to a valid `DjcmParams`, `out_roots` to three
/// writable `DjcmComplex`.
#[no_mangle]
pub unsafe extern "C" fn djcm_cubic_roots(params: *const DjcmParams, out_roots: *mut DjcmComplex) -> DjcmStatus {
    guard(|| {
        let p = model(deref(params, "params")?)?;
        let out = out_slice(out_roots, 3, 3, "out_roots")?;
        let roots = solve_cubic(&theta_poly(&sector_coefficients(&p), p.omega_e))
            .map_err(|e| Failure::new(DjcmStatus::ComputationFailed, e.to_string()))?;
        for (o, r) in out.iter_mut().zip(roots.roots) {
            *o = DjcmComplex { re: r.re, im: r.im };
        }
        Ok(())
    })
}

/// Evolves one sector on `samples` points covering scaled time
/// `[0, tau_max]`. `initial` holds `c1, c2, c3` or is null for the excited
/// state `|2,n>`. On success `*out` owns a new trajectory.
///
/// # Safety
/// `params` must point to a valid `DjcmParams`, `initial` must be null or
/// point to three `DjcmComplex`, `out` must point to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn djcm_solve(
    params: *const DjcmParams,
    initial: *const DjcmComplex,
    tau_max: f64,
    samples: usize,
    force_oracle: bool,
    out: *mut *mut DjcmTrajectory,
) -> DjcmStatus {
    guard(|| {
        let out = out_slice(out, 1, 1, "out")?;
        out[0] = std::ptr::null_mut();
        let p = model(deref(params, "params")?)?;
        if !(tau_max.is_finite() && tau_max >= 0.0) || samples == 0 {
            return Err(Failure::new(
                DjcmStatus::InvalidArgument,
                "tau_max must be finite and non-negative, samples positive",
            ));
        }
        let ic = if initial.is_null() {
            InitialCondition::excited()
        } else {
            let c = std::slice::from_raw_parts(initial, 3);
            let z = |k: usize| Complex64::new(c[k].re, c[k].im);
            InitialCondition::new(z(0), z(1), z(2))
                .map_err(|e| Failure::new(DjcmStatus::InvalidArgument, e.to_string()))?
        };
        let preference = if force_oracle {
            MethodPreference::ForceOracle
        } else {
            MethodPreference::Auto
        };
        let traj = solve_sector_with(&p, &ic, &time_grid(&p, tau_max, samples), preference)?;
        out[0] = Box::into_raw(Box::new(DjcmTrajectory(traj)));
        Ok(())
    })
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle from [`djcm_solve`].
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_len(traj: *const DjcmTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// # Safety
/// `traj` must be a live handle from [`djcm_solve`], `out` a writable
/// `DjcmMethod`.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_method(traj: *const DjcmTrajectory, out: *mut DjcmMethod) -> DjcmStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        out_slice(out, 1, 1, "out")?[0] = match t.0.method {
            Method::Analytic => DjcmMethod::Analytic,
            Method::Oracle => DjcmMethod::Oracle,
        };
        Ok(())
    })
}

/// Largest `| |c1|^2 + |c2|^2 + |c3|^2 - 1 |` over the samples.
///
/// # Safety
/// `traj` must be a live handle from [`djcm_solve`], `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_norm_drift(traj: *const DjcmTrajectory, out: *mut f64) -> DjcmStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        out_slice(out, 1, 1, "out")?[0] = t.0.max_norm_drift();
        Ok(())
    })
}

/// Scaled sample times. `out` needs [`djcm_trajectory_len`] entries.
///
/// # Safety
/// `traj` must be a live handle, `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_tau(traj: *const DjcmTrajectory, out: *mut f64, len: usize) -> DjcmStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let p = t.params.expect("solved trajectories carry parameters");
        let out = out_slice(out, len, t.samples.len(), "out")?;
        for (o, s) in out.iter_mut().zip(&t.samples) {
            *o = p.tau_of_t(s.t);
        }
        Ok(())
    })
}

/// Amplitudes `c1, c2, c3` per sample, sample-major. `out` needs three
/// entries per sample.
///
/// # Safety
/// `traj` must be a live handle, `out` must point to `len` writable
/// `DjcmComplex`.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_amplitudes(
    traj: *const DjcmTrajectory,
    out: *mut DjcmComplex,
    len: usize,
) -> DjcmStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let out = out_slice(out, len, 3 * t.samples.len(), "out")?;
        for (chunk, s) in out.chunks_exact_mut(3).zip(&t.samples) {
            for (o, c) in chunk.iter_mut().zip(s.amplitudes()) {
                *o = DjcmComplex { re: c.re, im: c.im };
            }
        }
        Ok(())
    })
}

fn series_kind(kind: u32) -> Option<ObservableKind> {
    Some(match kind {
        0 => ObservableKind::Populations,
        1 => ObservableKind::Inversion,
        2 => ObservableKind::G2,
        3 => ObservableKind::Entropy,
        4 => ObservableKind::MandelQ,
        5 => ObservableKind::Squeezing,
        _ => return None,
    })
}

/// Number of values per row for a `DjcmObservable`, 0 when unknown.
#[no_mangle]
pub extern "C" fn djcm_observable_columns(kind: u32) -> usize {
    series_kind(kind)
        .and_then(|k| k.columns())
        .map_or(0, <[&str]>::len)
}

/// Evaluates a `DjcmObservable` along the trajectory. Samples where the
/// observable is undefined are skipped, so `*out_rows` may be less than the
/// trajectory length. `tau` receives one entry per row, `values` holds
/// `rows * djcm_observable_columns(kind)` entries row-major. Both buffers
/// must fit the full trajectory length.
///
/// # Safety
/// `traj` must be a live handle, `tau` and `values` must point to
/// `tau_len` and `values_len` writable doubles, `out_rows` to a writable
/// `size_t`.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_observable(
    traj: *const DjcmTrajectory,
    kind: u32,
    tau: *mut f64,
    tau_len: usize,
    values: *mut f64,
    values_len: usize,
    out_rows: *mut usize,
) -> DjcmStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let kind = series_kind(kind)
            .ok_or_else(|| Failure::new(DjcmStatus::InvalidArgument, format!("unknown observable {kind}")))?;
        let width = kind.columns().map_or(0, <[&str]>::len);
        let n = t.samples.len();
        let tau = out_slice(tau, tau_len, n, "tau")?;
        let values = out_slice(values, values_len, n * width, "values")?;
        let rows = out_slice(out_rows, 1, 1, "out_rows")?;
        let table = series_table(t, kind);
        tau[..table.tau.len()].copy_from_slice(&table.tau);
        for (chunk, row) in values.chunks_exact_mut(width).zip(&table.rows) {
            chunk.copy_from_slice(row);
        }
        rows[0] = table.rows.len();
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from [`djcm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn djcm_trajectory_free(traj: *mut DjcmTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Husimi Q of the field on a square `[-range, range]^2` grid with
/// `resolution` points per axis at scaled time `tau`, starting from the
/// excited state. With `all_sectors` the sectors `0..=n_max` are summed,
/// `n_max == 0` picking the default truncation for the grid.
///
/// # Safety
/// `params` must point to a valid `DjcmParams`, `out` to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi(
    params: *const DjcmParams,
    tau: f64,
    range: f64,
    resolution: usize,
    all_sectors: bool,
    n_max: u32,
    out: *mut *mut DjcmHusimiGrid,
) -> DjcmStatus {
    guard(|| {
        let out = out_slice(out, 1, 1, "out")?;
        out[0] = std::ptr::null_mut();
        let p = model(deref(params, "params")?)?;
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Failure::new(DjcmStatus::InvalidArgument, "tau must be finite and non-negative"));
        }
        let spec = GridSpec::square(range, resolution);
        let mode = if all_sectors {
            HusimiMode::AllSectors {
                n_max: if n_max == 0 { spec.default_n_max() } else { n_max },
            }
        } else {
            HusimiMode::SingleSector
        };
        let grid = husimi_q(&p, p.t_of_tau(tau), &spec, mode)?;
        out[0] = Box::into_raw(Box::new(DjcmHusimiGrid(grid)));
        Ok(())
    })
}

/// Points per axis, 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle from [`djcm_husimi`].
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_resolution(grid: *const DjcmHusimiGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.x_axis.len())
}

/// Highest sector included, 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle from [`djcm_husimi`].
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_n_max(grid: *const DjcmHusimiGrid) -> u32 {
    grid.as_ref().map_or(0, |g| g.0.n_max)
}

/// Axis coordinates, `resolution` entries each.
///
/// # Safety
/// `grid` must be a live handle, `x` and `y` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_axes(
    grid: *const DjcmHusimiGrid,
    x: *mut f64,
    y: *mut f64,
    len: usize,
) -> DjcmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        out_slice(x, len, g.x_axis.len(), "x")?.copy_from_slice(&g.x_axis);
        out_slice(y, len, g.y_axis.len(), "y")?.copy_from_slice(&g.y_axis);
        Ok(())
    })
}

/// Q values row-major, `values[iy * resolution + ix]`.
///
/// # Safety
/// `grid` must be a live handle, `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_values(grid: *const DjcmHusimiGrid, out: *mut f64, len: usize) -> DjcmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let width = g.x_axis.len();
        let out = out_slice(out, len, width * g.y_axis.len(), "out")?;
        for (chunk, row) in out.chunks_exact_mut(width).zip(&g.values) {
            chunk.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Trapezoidal integral of Q over the grid.
///
/// # Safety
/// `grid` must be a live handle, `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_integral(grid: *const DjcmHusimiGrid, out: *mut f64) -> DjcmStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        out_slice(out, 1, 1, "out")?[0] = g.integral();
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from [`djcm_husimi`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn djcm_husimi_free(grid: *mut DjcmHusimiGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}
