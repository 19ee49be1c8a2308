//! Dormand-Prince 5(4) integrator with PI step-size control for small,
//! fixed-size complex systems `y' = f(t, y)`.
//!
//! The controller follows Hairer, Norsett & Wanner, *Solving ODEs I*,
//! section II.4: error norm is the RMS of the componentwise scaled error
//! `|err_i| / (atol + rtol max(|y_i|, |y_new_i|))`.

use num_complex::Complex64 as C64;
use thiserror::Error;

mod tableau {
    pub const C2: f64 = 1.0 / 5.0;
    pub const C3: f64 = 3.0 / 10.0;
    pub const C4: f64 = 4.0 / 5.0;
    pub const C5: f64 = 8.0 / 9.0;

    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;
    pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;
    pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0;
    pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0;
    pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;
    pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0;
    pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;

    // fifth-order weights (also row 7 of A, FSAL)
    pub const B1: f64 = 35.0 / 384.0;
    pub const B3: f64 = 500.0 / 1113.0;
    pub const B4: f64 = 125.0 / 192.0;
    pub const B5: f64 = -2187.0 / 6784.0;
    pub const B6: f64 = 11.0 / 84.0;

    // fifth minus embedded fourth order
    pub const E1: f64 = 71.0 / 57600.0;
    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;
    pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;
    pub const E7: f64 = -1.0 / 40.0;
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - BETA * 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("time grid must be non-empty, start at t0 and be strictly increasing")]
    BadGrid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-10,
            rtol: 1e-10,
            max_steps: 10_000_000,
        }
    }
}

/// Bookkeeping from one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

type State<const N: usize> = [C64; N];

fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (coef, k) in terms {
        let ch = coef * h;
        for i in 0..N {
            out[i] += k[i] * ch;
        }
    }
    out
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &State<N>, f0: &State<N>, tol: &Tolerances) -> f64
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    // Hairer's starting step heuristic.
    let sc = |y: &State<N>, i: usize| tol.atol + tol.rtol * y[i].norm();
    let rms = |v: &State<N>, y: &State<N>| {
        ((0..N).map(|i| (v[i].norm() / sc(y, i)).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = rms(y0, y0);
    let d1 = rms(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, &[(1.0, f0)], h0);
    let f1 = f(t0 + h0, &y1);
    let diff: State<N> = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(t, y)` from `grid[0]` with `y(grid[0]) = y0`, returning
/// the state at every grid time. Steps are clipped to land on grid points.
pub fn integrate<const N: usize, F>(
    f: F,
    y0: State<N>,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<State<N>>, Stats), IntegratorError>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    use tableau::*;

    let Some(&t0) = grid.first() else {
        return Err(IntegratorError::BadGrid);
    };
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid.iter().all(|t| t.is_finite()) {
        return Err(IntegratorError::BadGrid);
    }

    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    if grid.len() == 1 {
        return Ok((out, stats));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h_next = initial_step(&f, t, &y, &k1, tol);
    stats.evaluations += 1;
    let mut err_prev: f64 = 1e-4;

    for &target in &grid[1..] {
        while t < target {
            let remaining = target - t;
            let clipped = h_next >= remaining;
            let h = if clipped { remaining } else { h_next };
            if h <= 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(IntegratorError::StepSizeUnderflow { t, h });
            }
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(IntegratorError::TooManySteps(tol.max_steps));
            }

            let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = f(
                t + h,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
            let k7 = f(t + h, &y_new);
            stats.evaluations += 6;

            let mut acc = 0.0;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
                acc += (e.norm() / sc).powi(2);
            }
            let err = (acc / N as f64).sqrt();

            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                err_prev = err.max(1e-4);
                t = if clipped { target } else { t + h };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                // a clipped step says nothing about the natural step length
                let proposal = h * factor;
                h_next = if clipped { h_next.max(proposal) } else { proposal };
            } else {
                let factor = (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
                h_next = h * factor;
                stats.rejected += 1;
                if h_next <= 1e-14 * t.abs().max(1.0) {
                    return Err(IntegratorError::StepSizeUnderflow { t, h: h_next });
                }
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let (ys, stats) = integrate(
            |_t, y: &[C64; 1]| [-y[0]],
            [C64::new(1.0, 0.0)],
            &grid,
            &Tolerances::default(),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0].re - (-t).exp()).abs() < 1e-9, "t={t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn complex_rotation() {
        // y' = i w y with explicit time dependence in the coefficient
        let grid: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        let (ys, _) = integrate(
            |t, y: &[C64; 1]| [C64::i() * (0.3 + 0.01 * t) * y[0]],
            [C64::new(1.0, 0.0)],
            &grid,
            &Tolerances::default(),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            let phase = 0.3 * t + 0.005 * t * t;
            assert!((y[0] - C64::from_polar(1.0, phase)).norm() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn bad_grids() {
        let f = |_t: f64, y: &[C64; 1]| *y;
        let y0 = [C64::new(1.0, 0.0)];
        let tol = Tolerances::default();
        assert_eq!(integrate(f, y0, &[], &tol).unwrap_err(), IntegratorError::BadGrid);
        assert_eq!(integrate(f, y0, &[0.0, 1.0, 1.0], &tol).unwrap_err(), IntegratorError::BadGrid);
        let (ys, _) = integrate(f, y0, &[0.0], &tol).unwrap();
        assert_eq!(ys, vec![y0]);
    }

    #[test]
    fn step_budget() {
        let tol = Tolerances {
            max_steps: 5,
            ..Tolerances::default()
        };
        let err = integrate(|_t, y: &[C64; 1]| [C64::i() * y[0]], [C64::new(1.0, 0.0)], &[0.0, 1000.0], &tol)
            .unwrap_err();
        assert_eq!(err, IntegratorError::TooManySteps(5));
    }
}
