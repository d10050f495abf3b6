//! Command-line front end: single runs, batch experiments and the oracle suite.

pub mod config;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pursuit_core::assignment::Mode;
use pursuit_core::env::{load_map, MapError};
use pursuit_core::sim::{run_batch, run_episode, SimError, World};
use thiserror::Error;

use config::Experiment;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("map {}: {source}", path.display())]
    Map { path: PathBuf, source: MapError },
    #[error("map {}: cannot read: {source}", path.display())]
    MapMissing { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{failures} oracle check(s) failed")]
    Validation { failures: usize },
}

impl CliError {
    /// 2 for bad input files, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Map { .. } | CliError::MapMissing { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pursuit",
    version,
    about = "Multi-pursuer, multi-evader pursuit under positional uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one episode and write trace.jsonl and result.json.
    Run(RunArgs),
    /// Run every mode on a range of seeds and write summary tables.
    Batch(BatchArgs),
    /// Check the algorithms against brute-force oracles on random instances.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// First seed; runs use seed, seed + 1, ...
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated modes, in output order.
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<Mode>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated noise levels; one output directory per level.
    #[arg(long, value_delimiter = ',')]
    pub k2: Vec<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per property.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn load_world(exp: &Experiment) -> Result<World, CliError> {
    let text = std::fs::read_to_string(&exp.map_path).map_err(|source| CliError::MapMissing {
        path: exp.map_path.clone(),
        source,
    })?;
    let map = load_map(&text).map_err(|source| CliError::Map {
        path: exp.map_path.clone(),
        source,
    })?;
    Ok(World::new(
        map.with_cell_size(exp.cell_size),
        exp.episode.sensor.rho_obs,
    ))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut exp = Experiment::load(&args.config)?;
    let cfg = &mut exp.episode;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(k2) = args.k2 {
        cfg.sensor.k2 = k2;
    }
    if args.max_steps.is_some() {
        cfg.max_steps = args.max_steps;
    }
    cfg.record_trace = true;
    cfg.validate()?;
    let world = load_world(&exp)?;
    let result = run_episode(&world, &exp.episode)?;
    create_dir(&args.out)?;
    output::write_trace(&args.out.join("trace.jsonl"), &result.trace)?;
    output::write_json(&args.out.join("result.json"), &result)?;
    match (result.total_capture_time, result.max_capture_time) {
        (Some(total), Some(max)) => println!("{} seed {}: total {total} max {max}", result.mode, result.seed),
        _ => println!(
            "{} seed {}: timeout after {} steps ({} of {} captured)",
            result.mode,
            result.seed,
            result.steps,
            result.capture_steps.iter().flatten().count(),
            result.capture_steps.len()
        ),
    }
    Ok(())
}

pub fn cmd_batch(args: &BatchArgs) -> Result<(), CliError> {
    let mut exp = Experiment::load(&args.config)?;
    if let Some(seed) = args.seed {
        exp.episode.seed = seed;
    }
    if let Some(runs) = args.runs {
        exp.runs = runs;
    }
    if !args.mode.is_empty() {
        exp.modes = args.mode.clone();
    }
    if args.max_steps.is_some() {
        exp.episode.max_steps = args.max_steps;
    }
    if exp.runs == 0 {
        return Err(CliError::Config {
            path: args.config.clone(),
            message: "runs must be at least 1".into(),
        });
    }
    exp.episode.record_trace = false;
    let world = load_world(&exp)?;
    let seeds: Vec<u64> = (0..exp.runs as u64).map(|k| exp.episode.seed + k).collect();
    let levels: Vec<Option<f64>> = if args.k2.is_empty() {
        vec![None]
    } else {
        args.k2.iter().copied().map(Some).collect()
    };
    create_dir(&args.out)?;
    let mut sweep = Vec::new();
    for level in &levels {
        let mut template = exp.episode.clone();
        let dir = match level {
            Some(k2) => {
                template.sensor.k2 = *k2;
                args.out.join(format!("k2_{k2}"))
            }
            None => args.out.clone(),
        };
        template.validate()?;
        let outcome = run_batch(&world, &template, &exp.modes, &seeds)?;
        create_dir(&dir)?;
        output::write_batch(&dir, &outcome)?;
        println!("{}", dir.display());
        print!("{}", output::summary_csv(&outcome.summaries()));
        if let Some(k2) = level {
            sweep.push((*k2, outcome.summaries()));
        }
    }
    if !sweep.is_empty() {
        output::write_text(&args.out.join("noise_sweep.csv"), &output::sweep_csv(&sweep))?;
    }
    Ok(())
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let report = validate::run_suite(args.seed, args.cases, args.inject_fault);
    for line in &report.lines {
        println!("{line}");
    }
    if report.failures > 0 {
        return Err(CliError::Validation {
            failures: report.failures,
        });
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Validate(a) => cmd_validate(a),
    }
}
