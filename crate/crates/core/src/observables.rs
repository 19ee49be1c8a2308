//! Quantum measures derived from a single-sector state: populations,
//! inversion, deformed photon-number moments, `g2(0)`, the reduced atomic
//! state and its entropy, Mandel Q, quadrature squeezing and the Husimi Q
//! function.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{state_at, AmplitudeState, DynamicsError, InitialCondition, Trajectory};
use crate::model::{DeformationKind, ModelParams};

/// Eigenvalues of the reduced state closer than this to zero are clamped.
pub const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("{observable} is undefined: mean deformed photon number is zero")]
    UndefinedObservable { observable: &'static str },
}

pub fn populations(state: &AmplitudeState) -> [f64; 3] {
    [state.c1.norm_sqr(), state.c2.norm_sqr(), state.c3.norm_sqr()]
}

/// `W = rho_11 - rho_33`.
pub fn inversion(state: &AmplitudeState) -> f64 {
    state.c1.norm_sqr() - state.c3.norm_sqr()
}

/// `<A^dagger A>` and `<(A^dagger A)^2>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldMoments {
    pub m1: f64,
    pub m2: f64,
}

pub fn field_moments(state: &AmplitudeState, p: &ModelParams) -> FieldMoments {
    let n = p.sector_n;
    let d = p.deformation;
    let [p1, p2, p3] = populations(state);
    let upper = p2 + p3;
    let excited_field = d.f_squared(n + 1) * (n + 1) as f64;
    let ground_field = d.f_squared(n) * n as f64;
    FieldMoments {
        m1: excited_field * p1 + ground_field * upper,
        m2: excited_field * excited_field * p1 + ground_field * ground_field * upper,
    }
}

/// Zero-delay second-order correlation of the deformed field.
pub fn g2_zero(state: &AmplitudeState, p: &ModelParams) -> Result<f64, ObservableError> {
    let n = p.sector_n;
    let d = p.deformation;
    let FieldMoments { m1, .. } = field_moments(state, p);
    if m1 == 0.0 {
        return Err(ObservableError::UndefinedObservable { observable: "g2(0)" });
    }
    let [p1, p2, p3] = populations(state);
    let nf_n = n as f64 * d.f_squared(n);
    let from_excited = (n + 1) as f64 * d.f_squared(n + 1) * nf_n * p1;
    // no two-photon coincidence from the n = 0 component
    let from_upper = match n {
        0 => 0.0,
        _ => (n - 1) as f64 * d.f_squared(n - 1) * nf_n * (p2 + p3),
    };
    Ok((from_excited + from_upper) / (m1 * m1))
}

/// `Q = (<(A^dagger A)^2> - <A^dagger A>^2) / <A^dagger A> - 1`.
pub fn mandel_q(state: &AmplitudeState, p: &ModelParams) -> Result<f64, ObservableError> {
    let FieldMoments { m1, m2 } = field_moments(state, p);
    if m1 == 0.0 {
        return Err(ObservableError::UndefinedObservable { observable: "Mandel Q" });
    }
    Ok((m2 - m1 * m1) / m1 - 1.0)
}

/// Reduced atomic density matrix, rows and columns ordered `|1>, |2>, |3>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedAtomState {
    pub rho: [[C64; 3]; 3],
}

impl ReducedAtomState {
    pub fn trace(&self) -> f64 {
        (self.rho[0][0] + self.rho[1][1] + self.rho[2][2]).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((self.rho[r][c] - self.rho[c][r].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    ///
    /// `|1>` only couples to itself, so the spectrum is `rho_11` together
    /// with the two eigenvalues of the Hermitian `|2>,|3>` block.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let a = self.rho[1][1].re;
        let d = self.rho[2][2].re;
        let b = self.rho[1][2];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let mut ev = [self.rho[0][0].re, mean - radius, mean + radius];
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn reduced_density(state: &AmplitudeState) -> ReducedAtomState {
    let (c1, c2, c3) = (state.c1, state.c2, state.c3);
    let zero = C64::new(0.0, 0.0);
    ReducedAtomState {
        rho: [
            [c1 * c1.conj(), zero, zero],
            [zero, c2 * c2.conj(), c3 * c2.conj()],
            [zero, c2 * c3.conj(), c3 * c3.conj()],
        ],
    }
}

fn entropy_term(lambda: f64) -> f64 {
    let lambda = if (-EIGEN_CLAMP..0.0).contains(&lambda) { 0.0 } else { lambda };
    if lambda <= 0.0 {
        0.0
    } else {
        -lambda * lambda.ln()
    }
}

/// `-sum_j l_j ln l_j` over the eigenvalues of `rho`, in nats.
pub fn von_neumann_entropy(rho: &ReducedAtomState) -> f64 {
    rho.eigenvalues().into_iter().map(entropy_term).sum()
}

/// `-p ln p - (1 - p) ln (1 - p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_term(p) + entropy_term(1.0 - p)
}

/// Matrix-element engine for deformed ladder operators on one sector state.
pub mod moments {
    use super::*;

    /// Sparse expansion over `|atom, m>`; atom levels are `0, 1, 2`.
    #[derive(Clone, Debug, PartialEq)]
    pub struct FockVector {
        terms: Vec<(u8, u32, C64)>,
    }

    impl FockVector {
        pub fn from_sector(state: &AmplitudeState, n: u32) -> Self {
            FockVector {
                terms: vec![(0, n + 1, state.c1), (1, n, state.c2), (2, n, state.c3)],
            }
        }

        /// `A = a f(n)`: `A |m> = f(m) sqrt(m) |m - 1>`.
        pub fn lower(&self, d: DeformationKind) -> Self {
            FockVector {
                terms: self
                    .terms
                    .iter()
                    .filter(|&&(_, m, _)| m > 0)
                    .map(|&(a, m, c)| (a, m - 1, c * (d.f_value(m) * (m as f64).sqrt())))
                    .collect(),
            }
        }

        /// `A^dagger = f(n) a^dagger`: `A^dagger |m> = f(m + 1) sqrt(m + 1) |m + 1>`.
        pub fn raise(&self, d: DeformationKind) -> Self {
            FockVector {
                terms: self
                    .terms
                    .iter()
                    .map(|&(a, m, c)| (a, m + 1, c * (d.f_value(m + 1) * ((m + 1) as f64).sqrt())))
                    .collect(),
            }
        }

        /// `<self | other>`.
        pub fn inner(&self, other: &FockVector) -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for &(a, m, c) in &self.terms {
                for &(b, k, e) in &other.terms {
                    if a == b && m == k {
                        acc += c.conj() * e;
                    }
                }
            }
            acc
        }
    }

    /// `<psi| A^k |psi>`.
    pub fn lowering_moment(psi: &FockVector, d: DeformationKind, k: usize) -> C64 {
        let mut v = psi.clone();
        for _ in 0..k {
            v = v.lower(d);
        }
        psi.inner(&v)
    }

    /// `<psi| (A^dagger A)^k |psi>`.
    pub fn number_moment(psi: &FockVector, d: DeformationKind, k: usize) -> C64 {
        let mut v = psi.clone();
        for _ in 0..k {
            v = v.lower(d).raise(d);
        }
        psi.inner(&v)
    }
}

/// Squeezing parameters together with the anomalous moments they were
/// assembled from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Squeezing {
    pub s1_x: f64,
    pub s1_p: f64,
    pub s2_x: f64,
    pub s2_p: f64,
    /// `<A>`, `<A^2>`, `<A^4>`.
    pub anomalous: [C64; 3],
    pub m1: f64,
    pub m2: f64,
}

impl Squeezing {
    pub fn max_anomalous(&self) -> f64 {
        self.anomalous.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// First- and second-order squeezing parameters from explicit matrix
/// elements of `A`, `A^dagger` in the sector state.
pub fn squeezing_params(state: &AmplitudeState, p: &ModelParams) -> Squeezing {
    use moments::*;
    let d = p.deformation;
    let psi = FockVector::from_sector(state, p.sector_n);
    let a1 = lowering_moment(&psi, d, 1);
    let a2 = lowering_moment(&psi, d, 2);
    let a4 = lowering_moment(&psi, d, 4);
    // <A^dagger^k> = conj <A^k>
    let (ad1, ad2, ad4) = (a1.conj(), a2.conj(), a4.conj());
    let m1 = number_moment(&psi, d, 1).re;
    let m2 = number_moment(&psi, d, 2).re;

    let s1_x = 2.0 * m1 + a2 + ad2 - a1 * a1 - ad1 * ad1 - 2.0 * a1 * ad1;
    let s1_p = 2.0 * m1 - a2 - ad2 + a1 * a1 + ad1 * ad1 - 2.0 * a1 * ad1;
    let s2_x = 2.0 * m2 - 2.0 * m1 + a4 + ad4 - a2 * a2 - ad2 * ad2 - 2.0 * a2 * ad2;
    let s2_p = 2.0 * m2 - 2.0 * m1 - a4 - ad4 + a2 * a2 + ad2 * ad2 - 2.0 * a2 * ad2;
    Squeezing {
        s1_x: s1_x.re,
        s1_p: s1_p.re,
        s2_x: s2_x.re,
        s2_p: s2_p.re,
        anomalous: [a1, a2, a4],
        m1,
        m2,
    }
}

/// Which terms of the coherent-state projection to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HusimiMode {
    /// Only the solved sector `p.sector_n`.
    SingleSector,
    /// Every sector `0..=n_max`, each started in `|2, n>`.
    AllSectors { n_max: u32 },
}

/// Rectangular sampling of the complex `beta` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
}

impl GridSpec {
    /// Square grid `[-r, r]^2`.
    pub fn square(r: f64, resolution: usize) -> Self {
        GridSpec {
            x_range: (-r, r),
            y_range: (-r, r),
            resolution,
        }
    }

    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        let step = (range.1 - range.0) / (n - 1) as f64;
        (0..n).map(|k| range.0 + k as f64 * step).collect()
    }

    /// Largest `|beta|^2` on the grid.
    pub fn max_beta_sqr(&self) -> f64 {
        let x = self.x_range.0.abs().max(self.x_range.1.abs());
        let y = self.y_range.0.abs().max(self.y_range.1.abs());
        x * x + y * y
    }

    /// Truncation used when [`HusimiMode::AllSectors`] is requested without
    /// an explicit limit.
    pub fn default_n_max(&self) -> u32 {
        let b = self.max_beta_sqr();
        (b + 10.0 * b.sqrt()).ceil().max(30.0) as u32
    }

    fn validate(&self) -> Result<(), HusimiError> {
        let finite = [self.x_range.0, self.x_range.1, self.y_range.0, self.y_range.1]
            .iter()
            .all(|v| v.is_finite());
        if self.resolution < 2 || !finite || self.x_range.0 >= self.x_range.1 || self.y_range.0 >= self.y_range.1 {
            return Err(HusimiError::BadGrid);
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HusimiError {
    #[error("Husimi grid needs finite, increasing ranges and resolution >= 2")]
    BadGrid,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HusimiGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    /// `values[iy][ix]`.
    pub values: Vec<Vec<f64>>,
    pub t: f64,
    pub n_max: u32,
}

impl HusimiGrid {
    /// 2-D trapezoid integral of `Q` over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid_2d(&self.x_axis, &self.y_axis, &self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn trapezoid_2d(x: &[f64], y: &[f64], values: &[Vec<f64>]) -> f64 {
    let weights = |axis: &[f64]| -> Vec<f64> {
        let n = axis.len();
        (0..n)
            .map(|k| {
                let left = if k > 0 { axis[k] - axis[k - 1] } else { 0.0 };
                let right = if k + 1 < n { axis[k + 1] - axis[k] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    };
    let wx = weights(x);
    let wy = weights(y);
    values
        .iter()
        .zip(&wy)
        .map(|(row, wy)| wy * row.iter().zip(&wx).map(|(v, wx)| v * wx).sum::<f64>())
        .sum()
}

/// Per-sector weights `(|c1|^2, |c2|^2 + |c3|^2)` feeding the projection.
#[derive(Clone, Copy, Debug)]
struct SectorWeight {
    n: u32,
    excited: f64,
    upper: f64,
    /// `ln n!`
    ln_factorial: f64,
}

fn husimi_point(beta_sqr: f64, sectors: &[SectorWeight]) -> f64 {
    let mut total = 0.0;
    for s in sectors {
        let poisson = if beta_sqr == 0.0 {
            if s.n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (s.n as f64 * beta_sqr.ln() - beta_sqr - s.ln_factorial).exp()
        };
        total += poisson * (beta_sqr / (s.n + 1) as f64 * s.excited + s.upper);
    }
    total / std::f64::consts::PI
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn evaluate_grid(spec: &GridSpec, t: f64, n_max: u32, sectors: &[SectorWeight]) -> HusimiGrid {
    let x_axis = GridSpec::axis(spec.x_range, spec.resolution);
    let y_axis = GridSpec::axis(spec.y_range, spec.resolution);
    let values = y_axis
        .par_iter()
        .map(|&y| x_axis.iter().map(|&x| husimi_point(x * x + y * y, sectors)).collect())
        .collect();
    HusimiGrid {
        x_axis,
        y_axis,
        values,
        t,
        n_max,
    }
}

/// Husimi Q of a given single-sector state.
pub fn husimi_for_state(state: &AmplitudeState, n: u32, spec: &GridSpec) -> Result<HusimiGrid, HusimiError> {
    spec.validate()?;
    let weight = SectorWeight {
        n,
        excited: state.c1.norm_sqr(),
        upper: state.c2.norm_sqr() + state.c3.norm_sqr(),
        ln_factorial: ln_factorial(n),
    };
    Ok(evaluate_grid(spec, state.t, n, &[weight]))
}

/// Husimi Q at raw time `t` with the atom starting in `|2>`.
pub fn husimi_q(p: &ModelParams, t: f64, spec: &GridSpec, mode: HusimiMode) -> Result<HusimiGrid, HusimiError> {
    spec.validate()?;
    let ic = InitialCondition::excited();
    match mode {
        HusimiMode::SingleSector => {
            let state = state_at(p, &ic, t)?;
            husimi_for_state(&state, p.sector_n, spec)
        }
        HusimiMode::AllSectors { n_max } => {
            let sectors = (0..=n_max)
                .into_par_iter()
                .map(|n| {
                    let state = state_at(&p.with_sector(n), &ic, t)?;
                    Ok(SectorWeight {
                        n,
                        excited: state.c1.norm_sqr(),
                        upper: state.c2.norm_sqr() + state.c3.norm_sqr(),
                        ln_factorial: ln_factorial(n),
                    })
                })
                .collect::<Result<Vec<_>, DynamicsError>>()?;
            Ok(evaluate_grid(spec, t, n_max, &sectors))
        }
    }
}

/// Named registry of the time-series observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Populations,
    Inversion,
    G2,
    Entropy,
    MandelQ,
    Squeezing,
    Husimi,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 7] = [
        ObservableKind::Populations,
        ObservableKind::Inversion,
        ObservableKind::G2,
        ObservableKind::Entropy,
        ObservableKind::MandelQ,
        ObservableKind::Squeezing,
        ObservableKind::Husimi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Populations => "populations",
            ObservableKind::Inversion => "inversion",
            ObservableKind::G2 => "g2",
            ObservableKind::Entropy => "entropy",
            ObservableKind::MandelQ => "mandel_q",
            ObservableKind::Squeezing => "squeezing",
            ObservableKind::Husimi => "husimi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Column labels of the time-series table, `None` for Husimi which is a
    /// phase-space grid.
    pub fn columns(&self) -> Option<&'static [&'static str]> {
        Some(match self {
            ObservableKind::Populations => &["P1", "P2", "P3"],
            ObservableKind::Inversion => &["W"],
            ObservableKind::G2 => &["g2"],
            ObservableKind::Entropy => &["S"],
            ObservableKind::MandelQ => &["Q"],
            ObservableKind::Squeezing => &["s1_x", "s1_p", "s2_x", "s2_p"],
            ObservableKind::Husimi => return None,
        })
    }
}

/// One named scalar time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Several series of one observable sharing a `tau` column.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesTable {
    pub kind: ObservableKind,
    pub columns: Vec<String>,
    pub tau: Vec<f64>,
    /// `rows[k]` holds one value per column at `tau[k]`.
    pub rows: Vec<Vec<f64>>,
    /// Samples dropped because the observable was undefined there.
    pub undefined_samples: usize,
}

impl SeriesTable {
    pub fn series(&self, column: &str) -> Option<ObservableSeries> {
        let idx = self.columns.iter().position(|c| c == column)?;
        Some(ObservableSeries {
            name: column.to_string(),
            times: self.tau.clone(),
            values: self.rows.iter().map(|r| r[idx]).collect(),
        })
    }
}

/// Evaluates a time-series observable along a trajectory. Times are
/// reported as `tau = Omega t`.
///
/// Panics if called with [`ObservableKind::Husimi`] or with a trajectory
/// that carries no parameters.
pub fn series_table(traj: &Trajectory, kind: ObservableKind) -> SeriesTable {
    let p = traj.params.as_ref().expect("trajectory without model parameters");
    let columns = kind.columns().expect("Husimi is not a time series");
    let mut tau = Vec::with_capacity(traj.samples.len());
    let mut rows = Vec::with_capacity(traj.samples.len());
    let mut undefined = 0;
    for s in &traj.samples {
        let row = match kind {
            ObservableKind::Populations => Some(populations(s).to_vec()),
            ObservableKind::Inversion => Some(vec![inversion(s)]),
            ObservableKind::G2 => g2_zero(s, p).ok().map(|v| vec![v]),
            ObservableKind::Entropy => Some(vec![von_neumann_entropy(&reduced_density(s))]),
            ObservableKind::MandelQ => mandel_q(s, p).ok().map(|v| vec![v]),
            ObservableKind::Squeezing => {
                let q = squeezing_params(s, p);
                Some(vec![q.s1_x, q.s1_p, q.s2_x, q.s2_p])
            }
            ObservableKind::Husimi => unreachable!(),
        };
        match row {
            Some(r) => {
                tau.push(p.tau_of_t(s.t));
                rows.push(r);
            }
            None => undefined += 1,
        }
    }
    SeriesTable {
        kind,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        tau,
        rows,
        undefined_samples: undefined,
    }
}
