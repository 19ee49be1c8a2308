//! Self-check report: every acceptance criterion evaluated with its measured
//! numbers. The text depends only on the seed and tuple count.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    amplitudes_analytic_trajectory, solve_sector_with, time_grid, InitialCondition, MethodPreference, Trajectory,
};
use crate::model::{sector_coefficients, DeformationKind, ModelParams, SectorCoefficients};
use crate::observables::{
    binary_entropy, g2_zero, husimi_q, mandel_q, reduced_density, squeezing_params,
    von_neumann_entropy, GridSpec, HusimiMode,
};
use crate::spectrum::{cubic_roots_unchecked, theta_poly};

use super::figures::{self, row_params, FigureId, FigureOptions};
use super::CliError;

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_TUPLES: usize = 1000;

pub const TOL_CROSS_METHOD: f64 = 1e-6;
pub const TOL_NORM_DRIFT: f64 = 1e-9;
pub const TOL_REAL_PART: f64 = 1e-10;
pub const TOL_VIETA: f64 = 1e-12;
pub const TOL_ROOT_RESIDUAL: f64 = 1e-12;
pub const TOL_RABI: f64 = 1e-9;
pub const TOL_ENTROPY_IDENTITY: f64 = 1e-10;
pub const TOL_FOCK_Q: f64 = 1e-12;
pub const TOL_HUSIMI_NORM: f64 = 0.01;
pub const TOL_ANOMALOUS: f64 = 1e-14;
pub const TOL_SQUEEZING_SYMMETRY: f64 = 1e-13;
/// Population-exchange thresholds for rows 2 and 3 of the population figure.
pub const EXCHANGE_MAX_MIN_P2: f64 = 0.5;
pub const EXCHANGE_MIN_MAX_P3: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub tuples: usize,
    pub criteria: Vec<CriterionResult>,
}

impl ValidationReport {
    pub fn failures(&self) -> usize {
        self.criteria.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "djcm {} validate seed={} tuples={}",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            self.tuples
        );
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "{} {:>2} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.name,
                c.detail
            );
        }
        let _ = writeln!(s, "{}/{} criteria passed", self.criteria.len() - self.failures(), self.criteria.len());
        s
    }
}

fn result(id: usize, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

fn rows_with(tau_max: f64, samples: usize, pref: MethodPreference) -> Result<Vec<Trajectory>, CliError> {
    (0..3)
        .map(|r| {
            let p = row_params(r);
            Ok(solve_sector_with(&p, &InitialCondition::excited(), &time_grid(&p, tau_max, samples), pref)?)
        })
        .collect()
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

pub fn cross_method(analytic: &[Trajectory], oracle: &[Trajectory]) -> CriterionResult {
    let diffs: Vec<f64> = analytic.iter().zip(oracle).map(|(a, o)| a.max_abs_diff(o)).collect();
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    result(
        1,
        "cross-method equivalence",
        worst <= TOL_CROSS_METHOD,
        format!("max |analytic - oracle| per row [{}] <= {TOL_CROSS_METHOD:e}", fmt_list(&diffs)),
    )
}

pub fn norm_conservation(analytic: &[Trajectory], oracle: &[Trajectory]) -> CriterionResult {
    let a: Vec<f64> = analytic.iter().map(Trajectory::max_norm_drift).collect();
    let o: Vec<f64> = oracle.iter().map(Trajectory::max_norm_drift).collect();
    let worst = a.iter().chain(&o).copied().fold(0.0, f64::max);
    result(
        2,
        "norm conservation",
        worst <= TOL_NORM_DRIFT,
        format!("max | |c|^2 - 1 | analytic [{}] oracle [{}] <= {TOL_NORM_DRIFT:e}", fmt_list(&a), fmt_list(&o)),
    )
}

/// Random valid parameter tuple: ordered levels and cavity in `(0, 1]`,
/// couplings in `[0, 0.2]`, `chi` in `[0, 0.5]`, `n` in `0..=5`.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let mut w = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        w.sort_by(f64::total_cmp);
        let p = ModelParams {
            omega_cavity: 1.0 - rng.gen::<f64>(),
            omega_levels: w,
            g1: rng.gen_range(0.0..=0.2),
            g2: rng.gen_range(0.0..=0.2),
            omega_e: rng.gen_range(0.0..=0.2),
            deformation: DeformationKind::from_chi(rng.gen_range(0.0..=0.5)),
            sector_n: rng.gen_range(0..=5),
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

/// Worst root-quality numbers over a seeded sweep:
/// `(max |Re a| / max(1, |Im a|), max Vieta residual, max |theta(a)| / scale)`.
pub fn spectral_sweep(seed: u64, tuples: usize) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..tuples {
        let p = random_params(&mut rng);
        let poly = theta_poly(&sector_coefficients(&p), p.omega_e);
        let Ok(roots) = cubic_roots_unchecked(&poly) else {
            return (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        };
        worst.0 = worst.0.max(roots.max_real_part_ratio());
        worst.1 = roots.vieta_residuals(&poly).into_iter().fold(worst.1, f64::max);
        worst.2 = worst.2.max(roots.max_residual);
    }
    worst
}

pub fn spectral_structure(seed: u64, tuples: usize) -> CriterionResult {
    let (re, vieta, res) = spectral_sweep(seed, tuples);
    result(
        3,
        "spectral structure",
        tuples >= 1000 && re <= TOL_REAL_PART && vieta <= TOL_VIETA && res <= TOL_ROOT_RESIDUAL,
        format!(
            "{tuples} tuples: max |Re a|/max(1,|Im a|) = {re:.3e} <= {TOL_REAL_PART:e}, \
             max Vieta residual = {vieta:.3e} <= {TOL_VIETA:e}, max |theta(a)|/scale = {res:.3e} <= {TOL_ROOT_RESIDUAL:e}"
        ),
    )
}

pub fn rabi_limit() -> Result<CriterionResult, CliError> {
    let omega = 0.2;
    let (g1, g2) = (0.04, 0.06);
    let n = 1;
    let root = ((n + 1) as f64).sqrt();
    let c = SectorCoefficients::from_parts(0.0, 0.0, g1 * root, g2 * root, n);
    let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 40.0 / 2000.0 / omega).collect();
    let traj = amplitudes_analytic_trajectory(&c, 0.0, &InitialCondition::excited(), &grid)?;
    let big = (c.v1 * c.v1 + c.v2 * c.v2).sqrt();
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let (sin, cos) = (big * s.t).sin_cos();
        let c1 = C64::new(0.0, -c.v2 / big * sin);
        let c2 = C64::new(1.0 + c.v2 * c.v2 / (big * big) * (cos - 1.0), 0.0);
        let c3 = C64::new(c.v1 * c.v2 / (big * big) * (cos - 1.0), 0.0);
        worst = worst.max((s.c1 - c1).norm()).max((s.c2 - c2).norm()).max((s.c3 - c3).norm());
    }
    Ok(result(
        4,
        "closed-form Rabi limit",
        worst <= TOL_RABI,
        format!("max |analytic - hand solution| over tau in [0,40] = {worst:.3e} <= {TOL_RABI:e}"),
    ))
}

pub fn entropy_identity(trajectories: &[Trajectory]) -> CriterionResult {
    let mut worst = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in trajectories.iter().flat_map(|t| &t.samples) {
        let e = von_neumann_entropy(&reduced_density(s));
        worst = worst.max((e - binary_entropy(s.c1.norm_sqr())).abs());
        lo = lo.min(e);
        hi = hi.max(e);
    }
    let ln2 = std::f64::consts::LN_2;
    result(
        5,
        "entropy identity",
        worst <= TOL_ENTROPY_IDENTITY && lo >= 0.0 && hi <= ln2 + 1e-12,
        format!("max |S - H(P1)| = {worst:.3e} <= {TOL_ENTROPY_IDENTITY:e}, S in [{lo:.6}, {hi:.6}] within [0, ln 2]"),
    )
}

pub fn fock_statistics() -> Result<CriterionResult, CliError> {
    let mut parts = Vec::new();
    let mut ok = true;
    for chi in [0.0, 0.2] {
        let p = ModelParams::reference_row(0.04, 0.04, 0.06, chi);
        let traj = solve_sector_with(&p, &InitialCondition::excited(), &[0.0], MethodPreference::Auto)?;
        let s = &traj.samples[0];
        let g2 = g2_zero(s, &p).unwrap_or(f64::NAN);
        let q = mandel_q(s, &p).unwrap_or(f64::NAN);
        ok &= g2 == 0.0 && (q + 1.0).abs() <= TOL_FOCK_Q;
        parts.push(format!("chi={chi}: g2(0) = {g2:e}, Q + 1 = {:.3e}", q + 1.0));
    }
    Ok(result(6, "Fock-sector statistics at t=0", ok, parts.join("; ")))
}

pub fn husimi_normalization() -> Result<CriterionResult, CliError> {
    let spec = GridSpec::square(6.0, 241);
    let mut ok = true;
    let mut parts = Vec::new();
    for row in FigureId::Fig7.rows() {
        let p = row_params(*row);
        for tau in [0.0, 10.0, 25.0] {
            let g = husimi_q(&p, p.t_of_tau(tau), &spec, HusimiMode::SingleSector)?;
            let integral = g.integral();
            ok &= (integral - 1.0).abs() <= TOL_HUSIMI_NORM && g.min_value() >= 0.0;
            parts.push(format!("chi={} tau={tau}: {integral:.6}", p.deformation.chi()));
        }
    }
    Ok(result(
        7,
        "Husimi normalization",
        ok,
        format!("integral over radius-6 box, 241x241 [{}], 1 +- {TOL_HUSIMI_NORM}, all values >= 0", parts.join(", ")),
    ))
}

pub fn moment_vanishing(trajectories: &[Trajectory]) -> CriterionResult {
    let mut anomalous = 0.0f64;
    let mut asym = 0.0f64;
    for t in trajectories {
        let p = t.params.expect("figure trajectory has parameters");
        for s in &t.samples {
            let q = squeezing_params(s, &p);
            anomalous = anomalous.max(q.max_anomalous());
            asym = asym.max((q.s1_x - q.s1_p).abs()).max((q.s2_x - q.s2_p).abs());
        }
    }
    result(
        8,
        "moment vanishing",
        anomalous <= TOL_ANOMALOUS && asym <= TOL_SQUEEZING_SYMMETRY,
        format!(
            "max |<A^k>|, k=1,2,4 = {anomalous:.3e} <= {TOL_ANOMALOUS:e}; max |s_x - s_p| = {asym:.3e} <= {TOL_SQUEEZING_SYMMETRY:e}"
        ),
    )
}

/// Extremes of the emitted population panels: per row `(min P2, max P3)`,
/// plus the panel count and whether every value lies in `[0, 1]`.
pub fn population_panels(opts: &FigureOptions) -> Result<(usize, bool, Vec<(f64, f64)>), CliError> {
    let artifacts = figures::build(FigureId::Fig2, opts)?;
    let csvs: Vec<_> = artifacts.iter().filter(|a| a.name.ends_with(".csv")).collect();
    let mut in_range = true;
    let mut extremes = vec![(f64::INFINITY, f64::NEG_INFINITY); 3];
    for a in &csvs {
        let values: Vec<f64> = a
            .contents
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN))
            .collect();
        in_range &= values.iter().all(|v| (0.0..=1.0).contains(v));
        for row in 0..3 {
            if a.name == format!("fig2_row{}_P2.csv", row + 1) {
                extremes[row].0 = values.iter().copied().fold(f64::INFINITY, f64::min);
            }
            if a.name == format!("fig2_row{}_P3.csv", row + 1) {
                extremes[row].1 = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
        }
    }
    Ok((csvs.len(), in_range, extremes))
}

pub fn figure_shape() -> Result<CriterionResult, CliError> {
    let (panels, in_range, extremes) = population_panels(&FigureOptions {
        svg: false,
        ..FigureOptions::default()
    })?;
    let exchange = extremes[1..]
        .iter()
        .all(|&(min_p2, max_p3)| min_p2 < EXCHANGE_MAX_MIN_P2 && max_p3 > EXCHANGE_MIN_MAX_P3);
    let rows: Vec<String> = extremes
        .iter()
        .enumerate()
        .map(|(r, (a, b))| format!("row{}: min P2 = {a:.4}, max P3 = {b:.4}", r + 1))
        .collect();
    Ok(result(
        9,
        "figure-shape reproduction",
        panels == 9 && in_range && exchange,
        format!(
            "{panels} panels, values in [0,1]: {in_range}; {}; rows 2-3 need min P2 < {EXCHANGE_MAX_MIN_P2} and max P3 > {EXCHANGE_MIN_MAX_P3}",
            rows.join("; ")
        ),
    ))
}

pub fn determinism(seed: u64, tuples: usize) -> Result<CriterionResult, CliError> {
    let sweep_a = spectral_sweep(seed, tuples);
    let sweep_b = spectral_sweep(seed, tuples);
    let opts = FigureOptions {
        tau_max: 10.0,
        samples: 200,
        ..FigureOptions::default()
    };
    let fig_a = figures::build(FigureId::Fig2, &opts)?;
    let fig_b = figures::build(FigureId::Fig2, &opts)?;
    let same_sweep = format!("{sweep_a:?}") == format!("{sweep_b:?}");
    let same_fig = fig_a == fig_b;
    Ok(result(
        10,
        "determinism",
        same_sweep && same_fig,
        format!("repeated seeded sweep identical: {same_sweep}; repeated fig2 output identical: {same_fig}"),
    ))
}

/// Runs all criteria. The long trajectories are shared between criteria
/// 1, 2, 5 and 8.
pub fn run(seed: u64, tuples: usize) -> Result<ValidationReport, CliError> {
    let analytic = rows_with(figures::DEFAULT_TAU_MAX, figures::DEFAULT_SAMPLES, MethodPreference::Auto)?;
    let oracle = rows_with(figures::DEFAULT_TAU_MAX, figures::DEFAULT_SAMPLES, MethodPreference::ForceOracle)?;
    let analytic_60 = rows_with(60.0, figures::DEFAULT_SAMPLES, MethodPreference::Auto)?;
    let oracle_60 = rows_with(60.0, figures::DEFAULT_SAMPLES, MethodPreference::ForceOracle)?;
    let criteria = vec![
        cross_method(&analytic, &oracle),
        norm_conservation(&analytic_60, &oracle_60),
        spectral_structure(seed, tuples),
        rabi_limit()?,
        entropy_identity(&analytic),
        fock_statistics()?,
        husimi_normalization()?,
        moment_vanishing(&analytic),
        figure_shape()?,
        determinism(seed, tuples)?,
    ];
    Ok(ValidationReport { seed, tuples, criteria })
}
