//! `wavewell`: potential-well constants, simulations, sweeps and decay fits
//! from a TOML or JSON run configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavewell::lab::{classify, fit_decay, DEFAULT_WINDOW_FRACTION};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "wavewell", version, about = "Damped wave equation with logarithmic source: well constants and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (.toml or .json).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of optimizer restarts and direction sampling; overrides
    /// `output.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Well geometry: B7, K1, r_*, rho_*, M, d_estimate.
    Constants {
        #[command(flatten)]
        common: Common,
        /// Format printed to stdout.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Integrate one configuration and audit the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Classify the initial data without integrating.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the grid in the config's `sweep` section.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Concurrent runs.
        #[arg(long, value_name = "N", default_value_t = default_workers())]
        workers: usize,
    },
    /// Fit the decay laws to an existing trajectory.csv.
    Fit {
        /// Trajectory written by `simulate`.
        trajectory: PathBuf,
        /// Config supplying the damping exponent `p`.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Damping exponent; overrides the config.
        #[arg(long)]
        p: Option<f64>,
        /// Tail fraction of `[1, t_end]` to fit.
        #[arg(long, default_value_t = DEFAULT_WINDOW_FRACTION)]
        window: f64,
        /// Directory for fits.json.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    Ok(RunConfig::load(&common.config)?.with_seed(common.seed))
}

fn out_dir(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.dir.clone())
}

fn require_out(common: &Common, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    out_dir(common, cfg).ok_or_else(|| CliError::Usage("an output directory is required: pass --out or set output.dir".into()))
}

fn create(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Constants { common, format } => {
            let cfg = load(&common)?;
            let model = cfg.build_model()?;
            let geom = run::geometry(&cfg, &model)?;
            let json = serde_json::to_string_pretty(&geom)? + "\n";
            let text = run::geometry_text(&geom);
            if let Some(dir) = out_dir(&common, &cfg) {
                create(&dir)?;
                let (jp, tp) = (dir.join("constants.json"), dir.join("constants.txt"));
                fs::write(&jp, &json).map_err(|e| CliError::io(&jp, e))?;
                fs::write(&tp, &text).map_err(|e| CliError::io(&tp, e))?;
            }
            match format {
                Format::Text => print!("{text}"),
                Format::Json => print!("{json}"),
            }
        }
        Command::Classify { common, format } => {
            let cfg = load(&common)?;
            let model = cfg.build_model()?;
            let geom = run::geometry(&cfg, &model)?;
            let cls = classify(&model, &cfg.build_state(&model)?, &geom)?;
            if let Some(dir) = out_dir(&common, &cfg) {
                create(&dir)?;
                run::write_json(&dir.join("classification.json"), &cls)?;
            }
            match format {
                Format::Text => print!("{}", run::classification_text(&cls)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&cls)?),
            }
        }
        Command::Simulate { common } => {
            let cfg = load(&common)?;
            let dir = require_out(&common, &cfg)?;
            let model = cfg.build_model()?;
            let geom = run::geometry(&cfg, &model)?;
            let summary = run::simulate(&cfg, &model, &geom, &dir)?;
            print!("{}", run::summary_text(&summary));
        }
        Command::Sweep { common, workers } => {
            let cfg = load(&common)?;
            let dir = require_out(&common, &cfg)?;
            let lines = sweep::sweep(&cfg, &dir, workers)?;
            print!("{}", sweep::phase_table(&lines));
        }
        Command::Fit {
            trajectory,
            config,
            p,
            window,
            out,
        } => {
            let p = match (p, config) {
                (Some(p), _) => p,
                (None, Some(path)) => RunConfig::load(&path)?.problem.p,
                (None, None) => return Err(CliError::Usage("fit needs --p or --config to supply p".into())),
            };
            let records = run::read_trajectory(&trajectory)?;
            let report = fit_decay(&records, p, window)?;
            if let Some(dir) = out {
                create(&dir)?;
                run::write_json(&dir.join("fits.json"), &report)?;
            }
            print!("{}", run::fits_text(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
