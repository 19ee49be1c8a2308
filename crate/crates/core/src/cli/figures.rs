//! Parameter grids of the published figures and their panel emitters.

use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{solve_sector, time_grid, InitialCondition, Trajectory};
use crate::model::ModelParams;
use crate::observables::{husimi_q, series_table, GridSpec, HusimiMode, ObservableKind};

use super::{output, table_svg, with_thread_cap, CliError, Written};

/// The three parameter rows shared by every time-series figure:
/// `(omega_e, g1, g2, chi)`.
pub const ROWS: [(f64, f64, f64, f64); 3] = [
    (0.04, 0.04, 0.06, 0.0),
    (0.04, 0.06, 0.08, 0.2),
    (0.08, 0.06, 0.08, 0.2),
];

pub const DEFAULT_TAU_MAX: f64 = 50.0;
pub const DEFAULT_SAMPLES: usize = 2000;
/// Evaluation time of the Husimi panels when none is given.
pub const DEFAULT_HUSIMI_TAU: f64 = 25.0;
pub const HUSIMI_RANGE: f64 = 3.0;
pub const HUSIMI_RESOLUTION: usize = 121;

pub fn row_params(row: usize) -> ModelParams {
    let (omega_e, g1, g2, chi) = ROWS[row];
    ModelParams::reference_row(omega_e, g1, g2, chi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }

    /// Parameter rows drawn in this figure.
    pub fn rows(&self) -> &'static [usize] {
        match self {
            FigureId::Fig7 | FigureId::Fig8 => &[0, 2],
            _ => &[0, 1, 2],
        }
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}` (expected fig2..fig8)"))
    }
}

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub tau_max: f64,
    pub samples: usize,
    /// Husimi evaluation time for fig7.
    pub husimi_tau: f64,
    pub svg: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            tau_max: DEFAULT_TAU_MAX,
            samples: DEFAULT_SAMPLES,
            husimi_tau: DEFAULT_HUSIMI_TAU,
            svg: true,
        }
    }
}

/// A named file produced for one panel.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Trajectories of the given rows on the figure time grid, in row order.
pub fn row_trajectories(rows: &[usize], tau_max: f64, samples: usize) -> Result<Vec<Trajectory>, CliError> {
    rows.par_iter()
        .map(|&r| {
            let p = row_params(r);
            Ok(solve_sector(&p, &InitialCondition::excited(), &time_grid(&p, tau_max, samples))?)
        })
        .collect()
}

fn row_label(row: usize) -> String {
    let (omega_e, g1, g2, chi) = ROWS[row];
    format!("Omega_e={omega_e} g1={g1} g2={g2} chi={chi}")
}

fn push_panel(out: &mut Vec<Artifact>, stem: String, csv: String, svg: Option<String>) {
    if let Some(svg) = svg {
        out.push(Artifact {
            name: format!("{stem}.svg"),
            contents: svg,
        });
    }
    out.push(Artifact {
        name: format!("{stem}.csv"),
        contents: csv,
    });
}

/// Builds every panel of a figure in memory, ordered by panel.
pub fn build(id: FigureId, opts: &FigureOptions) -> Result<Vec<Artifact>, CliError> {
    with_thread_cap(|| build_inner(id, opts))
}

fn build_inner(id: FigureId, opts: &FigureOptions) -> Result<Vec<Artifact>, CliError> {
    let fig = id.name();
    let mut out = Vec::new();
    if id == FigureId::Fig7 {
        let spec = GridSpec::square(HUSIMI_RANGE, HUSIMI_RESOLUTION);
        for &row in id.rows() {
            let p = row_params(row);
            let grid = husimi_q(&p, p.t_of_tau(opts.husimi_tau), &spec, HusimiMode::SingleSector)?;
            let chi = ROWS[row].3;
            let title = format!("Husimi Q, chi = {chi}, tau = {}", opts.husimi_tau);
            let svg = opts.svg.then(|| output::heatmap_svg(&title, &grid));
            push_panel(&mut out, format!("{fig}_chi{chi}"), output::husimi_csv(&grid), svg);
        }
        return Ok(out);
    }

    let trajectories = row_trajectories(id.rows(), opts.tau_max, opts.samples)?;
    for (&row, traj) in id.rows().iter().zip(&trajectories) {
        let r = row + 1;
        let label = row_label(row);
        match id {
            FigureId::Fig2 => {
                let table = series_table(traj, ObservableKind::Populations);
                for level in 1..=3 {
                    let col = format!("P{level}");
                    let s = table.series(&col).expect("population column");
                    let csv = output::csv_string(&["tau", &col], s.times.iter().zip(&s.values).map(|(&t, &v)| vec![t, v]));
                    let svg = opts.svg.then(|| {
                        output::line_plot_svg(
                            &format!("{col}, {label}"),
                            "tau",
                            &[output::Line {
                                label: &col,
                                x: &s.times,
                                y: &s.values,
                            }],
                            Some((0.0, 1.0)),
                        )
                    });
                    push_panel(&mut out, format!("{fig}_row{r}_{col}"), csv, svg);
                }
            }
            FigureId::Fig8 => {
                let table = series_table(traj, ObservableKind::Squeezing);
                for (order, cols) in [(1, ["s1_x", "s1_p"]), (2, ["s2_x", "s2_p"])] {
                    let a = table.series(cols[0]).expect("squeezing column");
                    let b = table.series(cols[1]).expect("squeezing column");
                    let csv = output::csv_string(
                        &["tau", cols[0], cols[1]],
                        a.times.iter().zip(a.values.iter().zip(&b.values)).map(|(&t, (&x, &y))| vec![t, x, y]),
                    );
                    let svg = opts.svg.then(|| {
                        output::line_plot_svg(
                            &format!("order {order} squeezing, {label}"),
                            "tau",
                            &[
                                output::Line {
                                    label: cols[0],
                                    x: &a.times,
                                    y: &a.values,
                                },
                                output::Line {
                                    label: cols[1],
                                    x: &b.times,
                                    y: &b.values,
                                },
                            ],
                            None,
                        )
                    });
                    push_panel(&mut out, format!("{fig}_row{r}_s{order}"), csv, svg);
                }
            }
            _ => {
                let kind = match id {
                    FigureId::Fig3 => ObservableKind::Inversion,
                    FigureId::Fig4 => ObservableKind::G2,
                    FigureId::Fig5 => ObservableKind::Entropy,
                    FigureId::Fig6 => ObservableKind::MandelQ,
                    _ => unreachable!(),
                };
                let table = series_table(traj, kind);
                let svg = opts
                    .svg
                    .then(|| table_svg(&table, &format!("{}, {label}", kind.name())));
                push_panel(&mut out, format!("{fig}_row{r}_{}", kind.name()), output::table_csv(&table), svg);
            }
        }
    }
    Ok(out)
}

pub fn write(artifacts: &[Artifact], dir: &Path) -> Result<Written, CliError> {
    let mut written = Written::default();
    for a in artifacts {
        written.emit(dir, &a.name, &a.contents)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> FigureOptions {
        FigureOptions {
            tau_max: 5.0,
            samples: 11,
            ..FigureOptions::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for f in FigureId::ALL {
            assert_eq!(f.name().parse::<FigureId>().unwrap(), f);
        }
        assert!("fig9".parse::<FigureId>().is_err());
    }

    #[test]
    fn panel_counts() {
        let count = |id, svg| {
            let opts = FigureOptions { svg, ..quick() };
            build(id, &opts).unwrap().iter().filter(|a| a.name.ends_with(".csv")).count()
        };
        assert_eq!(count(FigureId::Fig2, true), 9);
        assert_eq!(count(FigureId::Fig5, false), 3);
        assert_eq!(count(FigureId::Fig8, false), 4);
        let fig2 = build(FigureId::Fig2, &quick()).unwrap();
        assert_eq!(fig2.len(), 18);
        assert_eq!(fig2[1].name, "fig2_row1_P1.csv");
    }

    #[test]
    fn population_panel_starts_excited() {
        let fig2 = build(FigureId::Fig2, &quick()).unwrap();
        let p2 = fig2.iter().find(|a| a.name == "fig2_row2_P2.csv").unwrap();
        let first: Vec<f64> = p2.contents.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert!((first[1] - 1.0).abs() < 1e-12);
    }
}
