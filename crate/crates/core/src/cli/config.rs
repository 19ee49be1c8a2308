//! JSON run configuration and sweep expansion.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::InitialCondition;
use crate::model::{DeformationKind, ModelParams};
use crate::observables::{GridSpec, HusimiMode, ObservableKind};

/// Upper bound on the number of points a sweep may expand to.
pub const MAX_SWEEP_POINTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Which amplitude route to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Oracle,
}

/// Husimi snapshot settings used when `husimi` is among the observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HusimiSettings {
    pub tau: f64,
    #[serde(default = "default_husimi_range")]
    pub range: f64,
    #[serde(default = "default_husimi_resolution")]
    pub resolution: usize,
    /// Sum sectors `0..=n` instead of the solved sector only.
    #[serde(default)]
    pub all_sectors: Option<u32>,
}

fn default_husimi_range() -> f64 {
    3.0
}

fn default_husimi_resolution() -> usize {
    121
}

impl HusimiSettings {
    pub fn grid(&self) -> GridSpec {
        GridSpec::square(self.range, self.resolution)
    }

    pub fn mode(&self) -> HusimiMode {
        match self.all_sectors {
            Some(n_max) => HusimiMode::AllSectors { n_max },
            None => HusimiMode::SingleSector,
        }
    }
}

/// One sweep axis: a parameter name and the values it takes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Parameters a sweep axis may vary.
pub const SWEEP_PARAMETERS: [&str; 9] = [
    "omega_cavity",
    "omega_1",
    "omega_2",
    "omega_3",
    "g1",
    "g2",
    "omega_e",
    "chi",
    "sector_n",
];

/// The configuration file as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    /// `[[re, im]; 3]`, defaults to the atom in `|2>`.
    #[serde(default = "default_ic")]
    pub ic: [[f64; 2]; 3],
    pub tau_max: f64,
    pub samples: usize,
    pub observables: Vec<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub svg: bool,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub husimi: Option<HusimiSettings>,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
}

fn default_ic() -> [[f64; 2]; 3] {
    [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn initial_condition(&self) -> Result<InitialCondition, ConfigError> {
        let [a, b, c] = self.ic.map(|[re, im]| C64::new(re, im));
        InitialCondition::new(a, b, c).map_err(|e| ConfigError::invalid("ic", e.to_string()))
    }

    /// Registry lookup of every requested observable, in request order with
    /// duplicates removed.
    pub fn observable_kinds(&self) -> Result<Vec<ObservableKind>, ConfigError> {
        let mut kinds = Vec::new();
        for (i, name) in self.observables.iter().enumerate() {
            let kind = ObservableKind::from_name(name).ok_or_else(|| {
                let known: Vec<_> = ObservableKind::ALL.iter().map(|k| k.name()).collect();
                ConfigError::invalid(
                    format!("observables[{i}]"),
                    format!("unknown observable `{name}` (expected one of {})", known.join(", ")),
                )
            })?;
            if !kinds.contains(&kind) {
                kinds.push(kind);
            }
        }
        Ok(kinds)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::invalid("params", e.to_string()))?;
        self.initial_condition()?;
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return Err(ConfigError::invalid("tau_max", format!("must be positive, got {}", self.tau_max)));
        }
        if self.samples < 2 {
            return Err(ConfigError::invalid("samples", format!("must be at least 2, got {}", self.samples)));
        }
        let kinds = self.observable_kinds()?;
        if kinds.contains(&ObservableKind::Husimi) {
            let Some(h) = &self.husimi else {
                return Err(ConfigError::invalid("husimi", "required when `husimi` is requested"));
            };
            if !(h.tau >= 0.0 && h.tau.is_finite()) {
                return Err(ConfigError::invalid("husimi.tau", "must be finite and non-negative"));
            }
            if !(h.range > 0.0 && h.range.is_finite()) {
                return Err(ConfigError::invalid("husimi.range", "must be positive"));
            }
            if h.resolution < 2 {
                return Err(ConfigError::invalid("husimi.resolution", "must be at least 2"));
            }
        }
        self.sweep_size()?;
        Ok(())
    }

    /// Number of sweep points (1 without axes).
    pub fn sweep_size(&self) -> Result<usize, ConfigError> {
        let mut size: usize = 1;
        for (i, axis) in self.sweep.iter().enumerate() {
            if !SWEEP_PARAMETERS.contains(&axis.parameter.as_str()) {
                return Err(ConfigError::invalid(
                    format!("sweep[{i}].parameter"),
                    format!("unknown parameter `{}` (expected one of {})", axis.parameter, SWEEP_PARAMETERS.join(", ")),
                ));
            }
            if axis.values.is_empty() {
                return Err(ConfigError::invalid(format!("sweep[{i}].values"), "must not be empty"));
            }
            size = size
                .checked_mul(axis.values.len())
                .filter(|&s| s <= MAX_SWEEP_POINTS)
                .ok_or_else(|| {
                    ConfigError::invalid("sweep", format!("expands to more than {MAX_SWEEP_POINTS} points"))
                })?;
        }
        Ok(size)
    }

    /// Expands the sweep into concrete parameter sets in row-major order
    /// (last axis fastest). Each point carries its axis assignments.
    pub fn expand(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let size = self.sweep_size()?;
        let mut points = Vec::with_capacity(size);
        for index in 0..size {
            let mut rest = index;
            let mut assignment = Vec::with_capacity(self.sweep.len());
            for axis in self.sweep.iter().rev() {
                let k = rest % axis.values.len();
                rest /= axis.values.len();
                assignment.push((axis.parameter.clone(), axis.values[k]));
            }
            assignment.reverse();
            let mut params = self.params;
            for (i, (name, value)) in assignment.iter().enumerate() {
                apply_axis(&mut params, name, *value)
                    .map_err(|m| ConfigError::invalid(format!("sweep[{i}].values"), m))?;
            }
            params.validate().map_err(|e| {
                ConfigError::invalid(format!("sweep point {index}"), e.to_string())
            })?;
            points.push(SweepPoint {
                index,
                assignment,
                params,
            });
        }
        Ok(points)
    }
}

fn apply_axis(p: &mut ModelParams, name: &str, value: f64) -> Result<(), String> {
    match name {
        "omega_cavity" => p.omega_cavity = value,
        "omega_1" => p.omega_levels[0] = value,
        "omega_2" => p.omega_levels[1] = value,
        "omega_3" => p.omega_levels[2] = value,
        "g1" => p.g1 = value,
        "g2" => p.g2 = value,
        "omega_e" => p.omega_e = value,
        "chi" => p.deformation = DeformationKind::from_chi(value),
        "sector_n" => {
            if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                return Err(format!("sector_n must be a non-negative integer, got {value}"));
            }
            p.sector_n = value as u32;
        }
        _ => return Err(format!("unknown parameter `{name}`")),
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub assignment: Vec<(String, f64)>,
    pub params: ModelParams,
}

pub fn load(path: &Path) -> Result<RunConfig, super::CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| super::CliError::io(path, e))?;
    let cfg = RunConfig::from_json(&text, &path.display().to_string())?;
    cfg.validate()?;
    Ok(cfg)
}
