use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use djcm::cli::figures::{self, FigureId, FigureOptions};
use djcm::cli::{self, config, validate, CliError, HusimiRequest, SimulateOverrides};
use djcm::model::ModelParams;

#[derive(Parser)]
#[command(name = "djcm", version, about = "Deformed three-level Jaynes-Cummings dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration (or sweep) and write CSV, SVG and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Integrate numerically instead of using the residue expansion.
        #[arg(long)]
        force_oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Reproduce the panels of one published figure.
    Figures {
        #[arg(value_parser = parse_figure)]
        figure: FigureId,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Husimi evaluation time (fig7).
        #[arg(long, default_value_t = figures::DEFAULT_HUSIMI_TAU)]
        tau: f64,
        #[arg(long, default_value_t = figures::DEFAULT_TAU_MAX)]
        tau_max: f64,
        #[arg(long, default_value_t = figures::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        no_svg: bool,
    },
    /// Husimi Q on a square grid around the origin.
    Husimi {
        /// Scaled time tau = Omega t.
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = figures::HUSIMI_RANGE)]
        range: f64,
        #[arg(long, default_value_t = figures::HUSIMI_RESOLUTION)]
        resolution: usize,
        /// Sum sectors 0..=N; without N a truncation is chosen from the grid.
        #[arg(long, value_name = "N_MAX", num_args = 0..=1)]
        all_sectors: Option<Option<u32>>,
        /// Take model parameters from a run config instead of a figure row.
        #[arg(long, conflicts_with = "row")]
        config: Option<PathBuf>,
        /// Figure parameter row 1..=3.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        row: u8,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Run every acceptance criterion and print a PASS/FAIL report.
    Validate {
        #[arg(long, default_value_t = validate::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = validate::DEFAULT_TUPLES)]
        tuples: usize,
    },
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse()
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate {
            config: path,
            force_oracle,
            out,
            tau_max,
            samples,
        } => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let cfg = config::RunConfig::from_json(&text, &path.display().to_string())?;
            let overrides = SimulateOverrides {
                force_oracle,
                out,
                tau_max,
                samples,
            };
            let cfg = cli::apply_overrides(cfg, &overrides)?;
            let written = cli::simulate(&cfg)?;
            for f in written.files {
                println!("{}", cfg.output_dir.join(f).display());
            }
        }
        Command::Figures {
            figure,
            out,
            tau,
            tau_max,
            samples,
            no_svg,
        } => {
            let opts = FigureOptions {
                tau_max,
                samples,
                husimi_tau: tau,
                svg: !no_svg,
            };
            if !(tau_max > 0.0) || samples < 2 || !(tau >= 0.0) {
                return Err(config::ConfigError::Invalid {
                    field: "--tau-max/--samples/--tau".into(),
                    message: "need tau_max > 0, samples >= 2, tau >= 0".into(),
                }
                .into());
            }
            let artifacts = figures::build(figure, &opts)?;
            let written = figures::write(&artifacts, &out)?;
            for f in written.files {
                println!("{}", out.join(f).display());
            }
        }
        Command::Husimi {
            t,
            range,
            resolution,
            all_sectors,
            config: path,
            row,
            out,
            no_svg,
        } => {
            let params: ModelParams = match path {
                Some(path) => config::load(&path)?.params,
                None => figures::row_params(row as usize - 1),
            };
            let req = HusimiRequest {
                params,
                tau: t,
                range,
                resolution,
                all_sectors,
                out: out.clone(),
                svg: !no_svg,
            };
            let (grid, written) = cli::husimi(&req)?;
            for f in written.files {
                println!("{}", out.join(f).display());
            }
            eprintln!("n_max = {}, integral over grid = {:.6}", grid.n_max, grid.integral());
        }
        Command::Validate { seed, tuples } => {
            let report = cli::with_thread_cap(|| validate::run(seed, tuples))?;
            print!("{}", report.render());
            if report.failures() > 0 {
                return Err(CliError::ValidationFailed(report.failures()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
