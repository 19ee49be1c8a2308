//! Time evolution of the sector amplitudes `(c1, c2, c3)` of
//! `|1,n+1>, |2,n>, |3,n>`.
//!
//! Two independent routes are provided:
//!
//! * the residue expansion of `M(s)^{-1} c(0)` over the roots of the
//!   characteristic cubic, `d(t) = sum_j adj M(a_j) c(0) e^{a_j t} / theta'(a_j)`,
//!   followed by the phase factors `c2 = e^{-i s t} d2`, `c3 = e^{-i h t} d3`;
//! * direct adaptive integration of the interaction-picture equations with
//!   their explicit time-dependent phases.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::integrator::{self, IntegratorError, Stats, Tolerances};
use crate::model::{sector_coefficients, ModelParams, ParamsError, SectorCoefficients};
use crate::spectrum::{solve_cubic, theta_poly, CubicPoly, CubicRoots, SpectrumError};

/// Allowed deviation of `|c|^2` from one for states produced by the engine.
pub const TOL_NORM: f64 = 1e-9;
/// Allowed deviation of `|c(0)|^2` from one for initial conditions.
pub const TOL_INITIAL_NORM: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("initial condition is not normalized: |c|^2 = {0}")]
    UnnormalizedInitialCondition(f64),
}

/// Amplitudes at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitialCondition([C64; 3]);

impl InitialCondition {
    pub fn new(c1: C64, c2: C64, c3: C64) -> Result<Self, DynamicsError> {
        let norm = c1.norm_sqr() + c2.norm_sqr() + c3.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > TOL_INITIAL_NORM {
            return Err(DynamicsError::UnnormalizedInitialCondition(norm));
        }
        Ok(InitialCondition([c1, c2, c3]))
    }

    /// Atom in `|2>`, field in `|n>`.
    pub fn excited() -> Self {
        InitialCondition([C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn amplitudes(&self) -> [C64; 3] {
        self.0
    }
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::excited()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplitudeState {
    pub t: f64,
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
}

impl AmplitudeState {
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.c3.norm_sqr()
    }

    pub fn amplitudes(&self) -> [C64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Largest componentwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &AmplitudeState) -> f64 {
        (self.c1 - other.c1)
            .norm()
            .max((self.c2 - other.c2).norm())
            .max((self.c3 - other.c3).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Analytic,
    Oracle,
}

/// Which route [`solve_sector_with`] should take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MethodPreference {
    /// Analytic unless the roots are degenerate.
    #[default]
    Auto,
    ForceOracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<AmplitudeState>,
    pub params: Option<ModelParams>,
    pub method: Method,
    /// Roots used by the analytic route.
    pub roots: Option<CubicRoots>,
    /// Integrator statistics for the oracle route.
    pub ode_stats: Option<Stats>,
}

impl Trajectory {
    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest componentwise amplitude difference between two trajectories
    /// sampled on the same grid.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.samples.len(), other.samples.len(), "trajectories on different grids");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

/// Adjugate of a 3x3 matrix.
fn adjugate(m: &[[C64; 3]; 3]) -> [[C64; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

/// The Laplace-domain matrix `M(s_)` of the rotated sector amplitudes.
pub fn laplace_matrix(c: &SectorCoefficients, omega_e: f64, z: C64) -> [[C64; 3]; 3] {
    let i = C64::i();
    [
        [z, i * c.v2, i * c.v1],
        [i * c.v2, z - i * c.s, i * omega_e],
        [i * c.v1, i * omega_e, z - i * c.h],
    ]
}

/// Precomputed residue expansion for one initial condition.
#[derive(Clone, Debug)]
pub struct ResidueExpansion {
    roots: [C64; 3],
    /// `residues[j]` is `adj M(a_j) c(0) / theta'(a_j)`.
    residues: [[C64; 3]; 3],
    s: f64,
    h: f64,
    c0: [C64; 3],
}

impl ResidueExpansion {
    pub fn new(c: &SectorCoefficients, omega_e: f64, roots: &CubicRoots, ic: &InitialCondition) -> Self {
        let poly: CubicPoly = theta_poly(c, omega_e);
        let c0 = ic.amplitudes();
        let residues = roots.roots.map(|alpha| {
            let adj = adjugate(&laplace_matrix(c, omega_e, alpha));
            let dtheta = poly.derivative(alpha);
            std::array::from_fn(|r| (adj[r][0] * c0[0] + adj[r][1] * c0[1] + adj[r][2] * c0[2]) / dtheta)
        });
        ResidueExpansion {
            roots: roots.roots,
            residues,
            s: c.s,
            h: c.h,
            c0,
        }
    }

    /// Amplitudes at `t`. At `t = 0` the initial condition is returned as
    /// given rather than as the rounded sum of residues.
    pub fn eval(&self, t: f64) -> AmplitudeState {
        if t == 0.0 {
            let [c1, c2, c3] = self.c0;
            return AmplitudeState { t, c1, c2, c3 };
        }
        let mut d = [C64::new(0.0, 0.0); 3];
        for (alpha, res) in self.roots.iter().zip(&self.residues) {
            let e = (alpha * t).exp();
            for r in 0..3 {
                d[r] += res[r] * e;
            }
        }
        AmplitudeState {
            t,
            c1: d[0],
            c2: d[1] * C64::from_polar(1.0, -self.s * t),
            c3: d[2] * C64::from_polar(1.0, -self.h * t),
        }
    }
}

/// Analytic amplitudes at time `t` for an arbitrary initial condition.
pub fn amplitudes_analytic(
    c: &SectorCoefficients,
    omega_e: f64,
    roots: &CubicRoots,
    ic: &InitialCondition,
    t: f64,
) -> AmplitudeState {
    ResidueExpansion::new(c, omega_e, roots, ic).eval(t)
}

/// Closed-form amplitudes for the atom starting in `|2>`, written out term by
/// term from the second column of `adj M(s)` with `theta'(a_j)` taken as the
/// product of root differences.
pub fn excited_state_closed_form(
    c: &SectorCoefficients,
    omega_e: f64,
    roots: &CubicRoots,
    t: f64,
) -> AmplitudeState {
    let i = C64::i();
    let (h, s, v1, v2) = (c.h, c.s, c.v1, c.v2);
    let mut c1 = C64::new(0.0, 0.0);
    let mut d2 = C64::new(0.0, 0.0);
    let mut d3 = C64::new(0.0, 0.0);
    for j in 0..3 {
        let a = roots.roots[j];
        let weight = (a * t).exp() / roots.derivative_at(j);
        c1 += -(i * a * v2 + v1 * omega_e + h * v2) * weight;
        d2 += (a * a - i * h * a + v1 * v1) * weight;
        d3 += -(i * omega_e * a + v1 * v2) * weight;
    }
    AmplitudeState {
        t,
        c1,
        c2: (-i * s * t).exp() * d2,
        c3: (-i * h * t).exp() * d3,
    }
}

/// Right-hand side of the interaction-picture amplitude equations.
pub fn amplitude_rhs(c: &SectorCoefficients, omega_e: f64, t: f64, y: &[C64; 3]) -> [C64; 3] {
    let mi = -C64::i();
    let eh = C64::from_polar(1.0, c.h * t);
    let es = C64::from_polar(1.0, c.s * t);
    let en = C64::from_polar(1.0, c.nu * t);
    [
        mi * (c.v1 * eh * y[2] + c.v2 * es * y[1]),
        mi * (c.v2 * es.conj() * y[0] + omega_e * en.conj() * y[2]),
        mi * (c.v1 * eh.conj() * y[0] + omega_e * en * y[1]),
    ]
}

/// Integrates the amplitude equations on `t_grid` at the default tolerances.
pub fn amplitudes_ode(
    c: &SectorCoefficients,
    omega_e: f64,
    ic: &InitialCondition,
    t_grid: &[f64],
) -> Result<Trajectory, DynamicsError> {
    amplitudes_ode_with(c, omega_e, ic, t_grid, &Tolerances::default())
}

pub fn amplitudes_ode_with(
    c: &SectorCoefficients,
    omega_e: f64,
    ic: &InitialCondition,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory, DynamicsError> {
    if t_grid.first() != Some(&0.0) {
        return Err(IntegratorError::BadGrid.into());
    }
    let (ys, stats) = integrator::integrate(|t, y| amplitude_rhs(c, omega_e, t, y), ic.amplitudes(), t_grid, tol)?;
    let samples = t_grid
        .iter()
        .zip(ys)
        .map(|(&t, [c1, c2, c3])| AmplitudeState { t, c1, c2, c3 })
        .collect();
    Ok(Trajectory {
        samples,
        params: None,
        method: Method::Oracle,
        roots: None,
        ode_stats: Some(stats),
    })
}

/// Analytic trajectory on `t_grid`; fails if the roots are degenerate.
pub fn amplitudes_analytic_trajectory(
    c: &SectorCoefficients,
    omega_e: f64,
    ic: &InitialCondition,
    t_grid: &[f64],
) -> Result<Trajectory, DynamicsError> {
    let roots = solve_cubic(&theta_poly(c, omega_e))?;
    let expansion = ResidueExpansion::new(c, omega_e, &roots, ic);
    Ok(Trajectory {
        samples: t_grid.iter().map(|&t| expansion.eval(t)).collect(),
        params: None,
        method: Method::Analytic,
        roots: Some(roots),
        ode_stats: None,
    })
}

/// Uniform grid of `samples` raw times covering scaled time `[0, tau_max]`.
pub fn time_grid(p: &ModelParams, tau_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let dt = p.t_of_tau(tau_max) / (samples - 1) as f64;
            (0..samples).map(|k| k as f64 * dt).collect()
        }
    }
}

/// Solves one sector, preferring the analytic route.
pub fn solve_sector(p: &ModelParams, ic: &InitialCondition, t_grid: &[f64]) -> Result<Trajectory, DynamicsError> {
    solve_sector_with(p, ic, t_grid, MethodPreference::Auto)
}

pub fn solve_sector_with(
    p: &ModelParams,
    ic: &InitialCondition,
    t_grid: &[f64],
    preference: MethodPreference,
) -> Result<Trajectory, DynamicsError> {
    p.validate()?;
    let c = sector_coefficients(p);
    let mut traj = match preference {
        MethodPreference::ForceOracle => amplitudes_ode(&c, p.omega_e, ic, t_grid)?,
        MethodPreference::Auto => match amplitudes_analytic_trajectory(&c, p.omega_e, ic, t_grid) {
            Ok(traj) => traj,
            Err(DynamicsError::Spectrum(SpectrumError::DegenerateRoots { .. })) => {
                amplitudes_ode(&c, p.omega_e, ic, t_grid)?
            }
            Err(e) => return Err(e),
        },
    };
    traj.params = Some(*p);
    Ok(traj)
}

/// Sector state at a single time.
pub fn state_at(p: &ModelParams, ic: &InitialCondition, t: f64) -> Result<AmplitudeState, DynamicsError> {
    let grid: &[f64] = if t == 0.0 { &[0.0] } else { &[0.0, t] };
    let traj = solve_sector(p, ic, grid)?;
    Ok(*traj.samples.last().expect("non-empty grid"))
}
