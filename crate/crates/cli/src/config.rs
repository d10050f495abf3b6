//! TOML experiment files.
//!
//! ```toml
//! [map]
//! path = "../maps/arena64.map"   # relative to this file
//!
//! [pursuers]
//! count = 5
//! spawn = { rule = "uniform" }
//!
//! [evaders]
//! count = 3
//!
//! [sensor]
//! k2 = 0.3
//!
//! [assignment]
//! mode = "MTRA"
//! samples = 50
//!
//! [run]
//! seed = 1
//! runs = 100
//! modes = ["TTRA", "MTRA", "NNA"]
//! ```
//!
//! Every key except `map.path` has a default.

use std::path::{Path, PathBuf};

use pursuit_core::assignment::Mode;
use pursuit_core::sim::{EpisodeConfig, EvaderTeam, PursuerTeam, SensorParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub path: PathBuf,
    #[serde(default = "unit")]
    pub cell_size: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssignmentSection {
    pub mode: Mode,
    pub samples: usize,
}

impl Default for AssignmentSection {
    fn default() -> Self {
        AssignmentSection {
            mode: Mode::Ttra,
            samples: 50,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub runs: usize,
    pub modes: Vec<Mode>,
    pub max_steps: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            runs: 100,
            modes: Mode::ALL.to_vec(),
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub map: MapSection,
    #[serde(default)]
    pub pursuers: PursuerTeam,
    #[serde(default)]
    pub evaders: EvaderTeam,
    #[serde(default)]
    pub sensor: SensorParams,
    #[serde(default)]
    pub assignment: AssignmentSection,
    #[serde(default)]
    pub run: RunSection,
}

/// A parsed file with the map path resolved against the file's directory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub map_path: PathBuf,
    pub cell_size: f64,
    pub episode: EpisodeConfig,
    pub runs: usize,
    pub modes: Vec<Mode>,
}

impl Experiment {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = origin.parent().unwrap_or(Path::new("."));
        let episode = EpisodeConfig {
            pursuers: file.pursuers,
            evaders: file.evaders,
            sensor: file.sensor,
            mode: file.assignment.mode,
            samples: file.assignment.samples,
            max_steps: file.run.max_steps,
            seed: file.run.seed,
            record_trace: true,
        };
        episode.validate().map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.run.modes.is_empty() {
            return Err(CliError::Config {
                path: origin.to_path_buf(),
                message: "run.modes is empty".into(),
            });
        }
        Ok(Experiment {
            map_path: base.join(&file.map.path),
            cell_size: file.map.cell_size,
            episode,
            runs: file.run.runs,
            modes: file.run.modes,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: format!("cannot read: {e}"),
        })?;
        Experiment::parse(&text, path)
    }
}
