//! Command implementations behind the `djcm` binary.

pub mod config;
pub mod figures;
pub mod output;
pub mod validate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{solve_sector_with, time_grid, DynamicsError, Method, MethodPreference, Trajectory};
use crate::model::ModelParams;
use crate::observables::{
    husimi_for_state, husimi_q, series_table, GridSpec, HusimiError, HusimiGrid, HusimiMode, ObservableKind,
};
use crate::spectrum::theta_poly;

pub use config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "DJCM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("computation failed: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("husimi evaluation failed: {0}")]
    Husimi(#[from] HusimiError),
    #[error("validation failed: {0} criterion(s) did not pass")]
    ValidationFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Dynamics(_) | CliError::Husimi(_) | CliError::ValidationFailed(_) => EXIT_VALIDATION,
        }
    }
}

/// Runs `f` on a pool capped by `DJCM_THREADS` when set to a positive
/// integer, otherwise on rayon's global pool.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Files written by a command, relative to its output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Written {
    pub files: Vec<String>,
}

impl Written {
    fn emit(&mut self, root: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        output::write_file(&root.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Per-point quality metrics stored in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub assignment: Vec<(String, f64)>,
    pub params: ModelParams,
    pub method: Method,
    pub max_norm_drift: f64,
    pub max_root_residual: Option<f64>,
    pub roots: Option<Vec<[f64; 2]>>,
    pub vieta_residuals: Option<[f64; 3]>,
    pub ode_steps: Option<usize>,
    pub undefined_samples: BTreeMap<String, usize>,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    method: String,
    max_norm_drift: f64,
    max_root_residual: Option<f64>,
    points: &'a [PointReport],
}

/// Overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct SimulateOverrides {
    pub force_oracle: bool,
    pub out: Option<PathBuf>,
    pub tau_max: Option<f64>,
    pub samples: Option<usize>,
}

pub fn apply_overrides(mut cfg: RunConfig, o: &SimulateOverrides) -> Result<RunConfig, ConfigError> {
    if o.force_oracle {
        cfg.method = config::MethodChoice::Oracle;
    }
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    if let Some(t) = o.tau_max {
        cfg.tau_max = t;
    }
    if let Some(s) = o.samples {
        cfg.samples = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct PointOutput {
    report: PointReport,
    artifacts: Vec<(String, String)>,
}

fn run_point(cfg: &RunConfig, point: &config::SweepPoint, prefix: &str) -> Result<PointOutput, CliError> {
    let p = point.params;
    let ic = cfg.initial_condition()?;
    let preference = match cfg.method {
        config::MethodChoice::Auto => MethodPreference::Auto,
        config::MethodChoice::Oracle => MethodPreference::ForceOracle,
    };
    let grid = time_grid(&p, cfg.tau_max, cfg.samples);
    let traj = solve_sector_with(&p, &ic, &grid, preference)?;

    let mut artifacts = Vec::new();
    let mut undefined = BTreeMap::new();
    for kind in cfg.observable_kinds()? {
        if kind == ObservableKind::Husimi {
            let h = cfg.husimi.expect("validated config");
            let t = p.t_of_tau(h.tau);
            let grid = match h.mode() {
                HusimiMode::SingleSector => {
                    let snap_grid = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
                    let snap = solve_sector_with(&p, &ic, &snap_grid, preference)?;
                    husimi_for_state(snap.samples.last().expect("non-empty"), p.sector_n, &h.grid())?
                }
                mode => husimi_q(&p, t, &h.grid(), mode)?,
            };
            artifacts.push((format!("{prefix}husimi.csv"), output::husimi_csv(&grid)));
            if cfg.svg {
                artifacts.push((
                    format!("{prefix}husimi.svg"),
                    output::heatmap_svg(&format!("Husimi Q at tau = {}", h.tau), &grid),
                ));
            }
            continue;
        }
        let table = series_table(&traj, kind);
        undefined.insert(kind.name().to_string(), table.undefined_samples);
        artifacts.push((format!("{prefix}{}.csv", kind.name()), output::table_csv(&table)));
        if cfg.svg {
            artifacts.push((format!("{prefix}{}.svg", kind.name()), table_svg(&table, kind.name())));
        }
    }

    let report = point_report(point, &traj, undefined, artifacts.iter().map(|(n, _)| n.clone()).collect());
    Ok(PointOutput { report, artifacts })
}

fn point_report(
    point: &config::SweepPoint,
    traj: &Trajectory,
    undefined: BTreeMap<String, usize>,
    files: Vec<String>,
) -> PointReport {
    let p = point.params;
    let poly = theta_poly(&crate::model::sector_coefficients(&p), p.omega_e);
    PointReport {
        index: point.index,
        assignment: point.assignment.clone(),
        params: p,
        method: traj.method,
        max_norm_drift: traj.max_norm_drift(),
        max_root_residual: traj.roots.as_ref().map(|r| r.max_residual),
        roots: traj.roots.as_ref().map(|r| r.roots.iter().map(|z| [z.re, z.im]).collect()),
        vieta_residuals: traj.roots.as_ref().map(|r| r.vieta_residuals(&poly)),
        ode_steps: traj.ode_stats.map(|s| s.accepted + s.rejected),
        undefined_samples: undefined,
        files,
    }
}

/// Line plot of every column of a table against `tau`.
pub fn table_svg(table: &crate::observables::SeriesTable, title: &str) -> String {
    let columns: Vec<Vec<f64>> = (0..table.columns.len())
        .map(|c| table.rows.iter().map(|r| r[c]).collect())
        .collect();
    let lines: Vec<output::Line> = table
        .columns
        .iter()
        .zip(&columns)
        .map(|(label, y)| output::Line {
            label,
            x: &table.tau,
            y,
        })
        .collect();
    let y_range = match table.kind {
        ObservableKind::Populations => Some((0.0, 1.0)),
        ObservableKind::Inversion => Some((-1.0, 1.0)),
        ObservableKind::Entropy => Some((0.0, std::f64::consts::LN_2)),
        _ => None,
    };
    output::line_plot_svg(title, "tau", &lines, y_range)
}

/// `simulate`: one CSV (and optional SVG) per observable plus
/// `manifest.json`. Sweeps write each point under `point_NNNN/`.
pub fn simulate(cfg: &RunConfig) -> Result<Written, CliError> {
    let points = cfg.expand()?;
    let sweeping = !cfg.sweep.is_empty();
    let outputs: Vec<PointOutput> = with_thread_cap(|| {
        points
            .par_iter()
            .map(|pt| {
                let prefix = if sweeping { format!("point_{:04}/", pt.index) } else { String::new() };
                run_point(cfg, pt, &prefix)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let root = &cfg.output_dir;
    let mut written = Written::default();
    for out in &outputs {
        for (name, contents) in &out.artifacts {
            written.emit(root, name, contents)?;
        }
    }
    let reports: Vec<PointReport> = outputs.into_iter().map(|o| o.report).collect();
    let first = reports[0].method;
    let method = if reports.iter().all(|r| r.method == first) {
        format!("{first:?}")
    } else {
        "Mixed".to_string()
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command: "simulate",
        config: cfg,
        method,
        max_norm_drift: reports.iter().map(|r| r.max_norm_drift).fold(0.0, f64::max),
        max_root_residual: reports
            .iter()
            .filter_map(|r| r.max_root_residual)
            .reduce(f64::max),
        points: &reports,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    written.emit(root, "manifest.json", &json)?;
    Ok(written)
}

/// Settings for the standalone `husimi` command.
#[derive(Clone, Debug)]
pub struct HusimiRequest {
    pub params: ModelParams,
    pub tau: f64,
    pub range: f64,
    pub resolution: usize,
    /// `Some(None)` sums sectors up to the default truncation.
    pub all_sectors: Option<Option<u32>>,
    pub out: PathBuf,
    pub svg: bool,
}

pub fn husimi(req: &HusimiRequest) -> Result<(HusimiGrid, Written), CliError> {
    if !(req.tau >= 0.0 && req.tau.is_finite()) {
        return Err(ConfigError::Invalid {
            field: "--t".into(),
            message: format!("must be finite and non-negative, got {}", req.tau),
        }
        .into());
    }
    if !(req.range > 0.0 && req.range.is_finite()) || req.resolution < 2 {
        return Err(ConfigError::Invalid {
            field: "--range/--resolution".into(),
            message: "range must be positive and resolution at least 2".into(),
        }
        .into());
    }
    req.params.validate().map_err(|e| ConfigError::Invalid {
        field: "params".into(),
        message: e.to_string(),
    })?;
    let spec = GridSpec::square(req.range, req.resolution);
    let mode = match req.all_sectors {
        None => HusimiMode::SingleSector,
        Some(n) => HusimiMode::AllSectors {
            n_max: n.unwrap_or_else(|| spec.default_n_max()),
        },
    };
    let grid = with_thread_cap(|| husimi_q(&req.params, req.params.t_of_tau(req.tau), &spec, mode))?;
    let mut written = Written::default();
    written.emit(&req.out, "husimi.csv", &output::husimi_csv(&grid))?;
    if req.svg {
        let title = format!("Husimi Q at tau = {}", req.tau);
        written.emit(&req.out, "husimi.svg", &output::heatmap_svg(&title, &grid))?;
    }
    Ok((grid, written))
}
