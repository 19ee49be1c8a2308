use std::ffi::CStr;
use std::ptr;

use djcm_ffi::*;

fn top_row() -> DjcmParams {
    let mut p = DjcmParams::default();
    assert_eq!(unsafe { djcm_params_reference(0.04, 0.04, 0.06, 0.0, &mut p) }, DjcmStatus::Ok);
    p
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let needed = unsafe { djcm_last_error(buf.as_mut_ptr(), buf.len()) };
    if needed == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn solve(p: &DjcmParams, tau_max: f64, samples: usize, oracle: bool) -> *mut DjcmTrajectory {
    let mut t = ptr::null_mut();
    let status = unsafe { djcm_solve(p, ptr::null(), tau_max, samples, oracle, &mut t) };
    assert_eq!(status, DjcmStatus::Ok, "{}", last_error());
    t
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(djcm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn roots_satisfy_vieta() {
    let p = top_row();
    let mut r = [DjcmComplex::default(); 3];
    assert_eq!(unsafe { djcm_cubic_roots(&p, r.as_mut_ptr()) }, DjcmStatus::Ok);
    assert!(r[0].im < r[1].im && r[1].im < r[2].im);
    assert!(r.iter().all(|z| z.re.abs() < 1e-12));
}

#[test]
fn trajectory_roundtrip() {
    let p = top_row();
    let t = solve(&p, 50.0, 200, false);
    let n = unsafe { djcm_trajectory_len(t) };
    assert_eq!(n, 200);

    let mut method = DjcmMethod::Oracle;
    assert_eq!(unsafe { djcm_trajectory_method(t, &mut method) }, DjcmStatus::Ok);
    assert_eq!(method, DjcmMethod::Analytic);

    let mut drift = 1.0;
    assert_eq!(unsafe { djcm_trajectory_norm_drift(t, &mut drift) }, DjcmStatus::Ok);
    assert!(drift < 1e-12);

    let mut tau = vec![0.0; n];
    assert_eq!(unsafe { djcm_trajectory_tau(t, tau.as_mut_ptr(), n) }, DjcmStatus::Ok);
    assert_eq!(tau[0], 0.0);
    assert!((tau[n - 1] - 50.0).abs() < 1e-12);

    let mut amps = vec![DjcmComplex::default(); 3 * n];
    assert_eq!(unsafe { djcm_trajectory_amplitudes(t, amps.as_mut_ptr(), 3 * n) }, DjcmStatus::Ok);
    assert_eq!(amps[1], DjcmComplex { re: 1.0, im: 0.0 });

    let cols = djcm_observable_columns(DjcmObservable::Populations as u32);
    assert_eq!(cols, 3);
    let mut vals = vec![0.0; n * cols];
    let mut rows = 0;
    let status = unsafe {
        djcm_trajectory_observable(
            t,
            DjcmObservable::Populations as u32,
            tau.as_mut_ptr(),
            n,
            vals.as_mut_ptr(),
            vals.len(),
            &mut rows,
        )
    };
    assert_eq!(status, DjcmStatus::Ok);
    assert_eq!(rows, n);
    for (k, row) in vals.chunks(3).enumerate() {
        let a = &amps[3 * k..3 * k + 3];
        for j in 0..3 {
            assert!((row[j] - (a[j].re * a[j].re + a[j].im * a[j].im)).abs() < 1e-15);
        }
    }
    unsafe { djcm_trajectory_free(t) };
}

#[test]
fn oracle_agrees_with_analytic() {
    let p = top_row();
    let a = solve(&p, 20.0, 50, false);
    let o = solve(&p, 20.0, 50, true);
    let mut method = DjcmMethod::Analytic;
    unsafe { djcm_trajectory_method(o, &mut method) };
    assert_eq!(method, DjcmMethod::Oracle);
    let mut x = vec![DjcmComplex::default(); 150];
    let mut y = vec![DjcmComplex::default(); 150];
    unsafe {
        djcm_trajectory_amplitudes(a, x.as_mut_ptr(), 150);
        djcm_trajectory_amplitudes(o, y.as_mut_ptr(), 150);
        djcm_trajectory_free(a);
        djcm_trajectory_free(o);
    }
    let diff = x
        .iter()
        .zip(&y)
        .map(|(u, v)| (u.re - v.re).hypot(u.im - v.im))
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn errors_are_reported() {
    let mut t = ptr::null_mut();
    let status = unsafe { djcm_solve(ptr::null(), ptr::null(), 1.0, 10, false, &mut t) };
    assert_eq!(status, DjcmStatus::NullPointer);
    assert!(last_error().contains("params"));
    assert!(t.is_null());

    let mut p = top_row();
    p.omega_cavity = -1.0;
    let status = unsafe { djcm_solve(&p, ptr::null(), 1.0, 10, false, &mut t) };
    assert_eq!(status, DjcmStatus::InvalidParams);
    assert!(!last_error().is_empty());

    let p = top_row();
    let bad = [DjcmComplex { re: 2.0, im: 0.0 }, DjcmComplex::default(), DjcmComplex::default()];
    let status = unsafe { djcm_solve(&p, bad.as_ptr(), 1.0, 10, false, &mut t) };
    assert_eq!(status, DjcmStatus::InvalidArgument);

    let t = solve(&p, 1.0, 10, false);
    let mut small = [0.0; 5];
    assert_eq!(unsafe { djcm_trajectory_tau(t, small.as_mut_ptr(), 5) }, DjcmStatus::BufferTooSmall);
    assert!(last_error().contains("10 required"));
    let mut rows = 0;
    let status = unsafe { djcm_trajectory_observable(t, 99, small.as_mut_ptr(), 5, small.as_mut_ptr(), 5, &mut rows) };
    assert_eq!(status, DjcmStatus::InvalidArgument);
    assert_eq!(djcm_observable_columns(99), 0);
    unsafe { djcm_trajectory_free(t) };

    // a success clears the message
    top_row();
    assert_eq!(unsafe { djcm_last_error(ptr::null_mut(), 0) }, 0);
    unsafe {
        djcm_trajectory_free(ptr::null_mut());
        djcm_husimi_free(ptr::null_mut());
    }
}

#[test]
fn husimi_grid_roundtrip() {
    let p = top_row();
    let mut g = ptr::null_mut();
    let status = unsafe { djcm_husimi(&p, 5.0, 6.0, 121, false, 0, &mut g) };
    assert_eq!(status, DjcmStatus::Ok, "{}", last_error());
    let res = unsafe { djcm_husimi_resolution(g) };
    assert_eq!(res, 121);
    assert_eq!(unsafe { djcm_husimi_n_max(g) }, 1);

    let (mut x, mut y) = (vec![0.0; res], vec![0.0; res]);
    assert_eq!(unsafe { djcm_husimi_axes(g, x.as_mut_ptr(), y.as_mut_ptr(), res) }, DjcmStatus::Ok);
    assert_eq!((x[0], x[res - 1]), (-6.0, 6.0));
    let mut q = vec![0.0; res * res];
    assert_eq!(unsafe { djcm_husimi_values(g, q.as_mut_ptr(), q.len()) }, DjcmStatus::Ok);
    assert!(q.iter().all(|&v| v >= 0.0));

    let h = x[1] - x[0];
    let mut sum = 0.0;
    for iy in 0..res {
        for ix in 0..res {
            let wx = if ix == 0 || ix == res - 1 { 0.5 } else { 1.0 };
            let wy = if iy == 0 || iy == res - 1 { 0.5 } else { 1.0 };
            sum += wx * wy * q[iy * res + ix];
        }
    }
    let mut integral = 0.0;
    assert_eq!(unsafe { djcm_husimi_integral(g, &mut integral) }, DjcmStatus::Ok);
    assert!((sum * h * h - integral).abs() < 1e-12);
    assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    unsafe { djcm_husimi_free(g) };

    let status = unsafe { djcm_husimi(&p, 0.0, 2.0, 5, true, 0, &mut g) };
    assert_eq!(status, DjcmStatus::Ok);
    assert_eq!(unsafe { djcm_husimi_n_max(g) }, 37);
    unsafe { djcm_husimi_free(g) };

    let status = unsafe { djcm_husimi(&p, 1.0, 2.0, 1, false, 0, &mut g) };
    assert_eq!(status, DjcmStatus::InvalidArgument);
    assert!(g.is_null());
}
