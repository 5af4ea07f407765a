//! Command-line front end.
//!
//! Each invocation loads one JSON scenario, runs one experiment and writes
//! `<prefix>_results.csv` and `<prefix>_manifest.json` (plus optional
//! snapshots) into the output directory. `GPLAB_OUTPUT_DIR` overrides
//! `output.dir`. Nothing is written unless the experiment succeeds.
//!
//! Exit codes: 0 on success, 3 for numerical failures (solver breakdown,
//! non-convergence), 2 for everything else.

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::{load, Experiment, LoadedConfig, ScenarioConfig};
pub use output::Manifest;

use crate::error::{Error, Result};

pub const OUTPUT_DIR_ENV: &str = "GPLAB_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "gplab", version, about = "Bose gas numerics: scattering, GP dynamics, exact few-body runs, hierarchies")]
pub struct Cli {
    /// Worker threads; all computations are currently sequential.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment named in the config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Merge result tables of several run directories.
    Report {
        #[arg(long, default_value = "summary.csv")]
        output: PathBuf,
        dirs: Vec<PathBuf>,
    },
    Scatter {
        #[arg(long)]
        config: PathBuf,
    },
    GpEvolve {
        #[arg(long)]
        config: PathBuf,
    },
    GpGroundstate {
        #[arg(long)]
        config: PathBuf,
    },
    Manybody {
        #[arg(long)]
        config: PathBuf,
    },
    Hierarchy {
        #[arg(long)]
        config: PathBuf,
    },
    PowerCounting {
        #[arg(long)]
        config: PathBuf,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(&cli) {
        Ok(path) => {
            log::info!("wrote {}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<PathBuf> {
    if cli.threads == 0 {
        return Err(Error::config("--threads must be >= 1"));
    }
    let (path, expected) = match &cli.command {
        Command::Report { output, dirs } => return report::report(dirs, output),
        Command::Run { config } => (config, None),
        Command::Scatter { config } => (config, Some(Experiment::Scatter)),
        Command::GpEvolve { config } => (config, Some(Experiment::GpEvolve)),
        Command::GpGroundstate { config } => (config, Some(Experiment::GpGroundstate)),
        Command::Manybody { config } => (config, Some(Experiment::Manybody)),
        Command::Hierarchy { config } => (config, Some(Experiment::Hierarchy)),
        Command::PowerCounting { config } => (config, Some(Experiment::PowerCounting)),
    };
    run_config(path, expected, cli.threads)
}

/// Load and run one scenario; returns the path of the results table.
///
/// `expected` is the experiment implied by a named subcommand; a config
/// naming a different one is rejected.
pub fn run_config(path: &Path, expected: Option<Experiment>, threads: usize) -> Result<PathBuf> {
    let loaded = load(path)?;
    let cfg = &loaded.config;
    let experiment = match (cfg.experiment, expected) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(format!("config names experiment {}, subcommand runs {}", a.name(), b.name())));
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::config("config has no `experiment`; name one or use its subcommand")),
    };
    let base = &loaded.base_dir;
    let start = Instant::now();
    let outcome = match experiment {
        Experiment::Scatter => experiments::scatter(cfg, base)?,
        Experiment::GpEvolve => experiments::gp_evolve(cfg, base)?,
        Experiment::GpGroundstate => experiments::gp_groundstate(cfg, base)?,
        Experiment::Manybody => experiments::manybody(cfg, base)?,
        Experiment::Hierarchy => experiments::hierarchy(cfg, base)?,
        Experiment::PowerCounting => experiments::power_counting(cfg)?,
        Experiment::Report => {
            let inputs = cfg.inputs.as_ref().ok_or_else(|| Error::config("report needs `inputs`"))?;
            report::merge(&inputs.iter().map(|p| base.join(p)).collect::<Vec<_>>())?
        }
    };
    let dir = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) => PathBuf::from(d),
        None => base.join(&cfg.output.dir),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: experiment.name().to_string(),
        config_hash: loaded.hash.clone(),
        results: String::new(),
        files: Vec::new(),
        mode: None,
        seed: cfg.seed,
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_outcome(&dir, &cfg.output.prefix, &outcome, manifest)?;
    Ok(dir.join(format!("{}_results.csv", cfg.output.prefix)))
}
