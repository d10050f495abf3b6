//! Pursuer-to-evader assignment: sampled travel times, Hungarian variants,
//! greedy redundant assignment and the nearest-neighbor baseline.

mod hungarian;
mod nna;
mod redundant;
mod sampling;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::ProbabilityField;
use crate::evader::PursuerProfile;
use crate::geodesic::GeodesicField;

pub use hungarian::{hungarian_min_max, hungarian_min_total, ominus_inf, oplus_inf};
pub use nna::nna;
pub use redundant::{mtrra, mtrra_rounds, ttrra, ttrra_rounds, GreedyRound};
pub use sampling::{sample_pursuer_travel_times, sample_travel_times};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("{pursuers} pursuers cannot cover {evaders} evaders")]
    TooFewPursuers { pursuers: usize, evaders: usize },
    #[error("evader {0} unreachable by every pursuer")]
    EvaderUnreachable(usize),
    #[error("pursuer {0} assigned more than once")]
    DuplicatePursuer(usize),
    #[error("initial assignment must hold exactly one pursuer per evader")]
    BadInitialAssignment,
    #[error("pair ({0}, {1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("cost matrix is {rows}x{cols} but holds {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("cost entries must be nonnegative, got {0}")]
    NegativeCost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "TTRA")]
    Ttra,
    #[serde(rename = "MTRA")]
    Mtra,
    #[serde(rename = "NNA")]
    Nna,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ttra, Mode::Mtra, Mode::Nna];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ttra => "TTRA",
            Mode::Mtra => "MTRA",
            Mode::Nna => "NNA",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode {0:?}, expected TTRA, MTRA or NNA")]
pub struct ParseModeError(String);

impl FromStr for Mode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TTRA" => Ok(Mode::Ttra),
            "MTRA" => Ok(Mode::Mtra),
            "NNA" => Ok(Mode::Nna),
            _ => Err(ParseModeError(s.to_string())),
        }
    }
}

/// Set of (pursuer, evader) pairs in which each pursuer appears at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self, AssignmentError> {
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(AssignmentError::DuplicatePursuer(w[0].0));
        }
        Ok(Assignment { pairs })
    }

    pub fn empty() -> Self {
        Assignment::default()
    }

    /// Pairs sorted by pursuer.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn evader_of(&self, pursuer: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&pursuer, |p| p.0)
            .ok()
            .map(|k| self.pairs[k].1)
    }

    /// `I_j`: pursuers assigned to `evader`, ascending.
    pub fn pursuers_of(&self, evader: usize) -> Vec<usize> {
        self.pairs.iter().filter(|p| p.1 == evader).map(|p| p.0).collect()
    }

    pub fn union(&self, other: &Assignment) -> Result<Assignment, AssignmentError> {
        Assignment::new(self.pairs.iter().chain(&other.pairs).copied().collect())
    }

    /// Relabels indices through `pursuers[i]` and `evaders[j]`.
    pub fn remap(&self, pursuers: &[usize], evaders: &[usize]) -> Assignment {
        let pairs = self.pairs.iter().map(|&(i, j)| (pursuers[i], evaders[j])).collect();
        Assignment::new(pairs).expect("remapping keeps pursuers distinct")
    }
}

/// Dense pursuer-by-evader cost matrix. Entries may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, AssignmentError> {
        if data.len() != rows * cols {
            return Err(AssignmentError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|c| !(**c >= 0.0)) {
            return Err(AssignmentError::NegativeCost(bad));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        CostMatrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn check_shape(&self) -> Result<(), AssignmentError> {
        if self.rows < self.cols {
            return Err(AssignmentError::TooFewPursuers {
                pursuers: self.rows,
                evaders: self.cols,
            });
        }
        if let Some(j) = (0..self.cols).find(|&j| (0..self.rows).all(|i| self.get(i, j).is_infinite())) {
            return Err(AssignmentError::EvaderUnreachable(j));
        }
        Ok(())
    }

    /// Sum of matched costs, summed in pursuer order.
    pub fn total(&self, a: &Assignment) -> f64 {
        a.pairs().iter().map(|&(i, j)| self.get(i, j)).sum()
    }

    pub fn bottleneck(&self, a: &Assignment) -> f64 {
        a.pairs().iter().map(|&(i, j)| self.get(i, j)).fold(0.0, f64::max)
    }
}

/// `h` joint samples of pursuer-to-evader travel times, indexed `(z, i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeSamples {
    h: usize,
    pursuers: usize,
    evaders: usize,
    tau: Vec<f64>,
}

impl TravelTimeSamples {
    pub fn new(h: usize, pursuers: usize, evaders: usize, tau: Vec<f64>) -> Result<Self, AssignmentError> {
        if tau.len() != h * pursuers * evaders {
            return Err(AssignmentError::Shape {
                rows: pursuers,
                cols: evaders,
                len: tau.len(),
            });
        }
        if let Some(&bad) = tau.iter().find(|t| !(**t >= 0.0)) {
            return Err(AssignmentError::NegativeCost(bad));
        }
        Ok(TravelTimeSamples {
            h,
            pursuers,
            evaders,
            tau,
        })
    }

    /// Single deterministic sample.
    pub fn from_matrix(c: &CostMatrix) -> Self {
        TravelTimeSamples {
            h: 1,
            pursuers: c.rows,
            evaders: c.cols,
            tau: c.data.clone(),
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn pursuers(&self) -> usize {
        self.pursuers
    }

    pub fn evaders(&self) -> usize {
        self.evaders
    }

    pub fn get(&self, z: usize, i: usize, j: usize) -> f64 {
        self.tau[(z * self.pursuers + i) * self.evaders + j]
    }

    /// Replaces infinite entries with `cap`.
    pub fn capped(mut self, cap: f64) -> Self {
        for t in &mut self.tau {
            if *t > cap {
                *t = cap;
            }
        }
        self
    }

    /// `C_ij`: sample mean of each travel time.
    pub fn mean_costs(&self) -> CostMatrix {
        let mut data = vec![0.0; self.pursuers * self.evaders];
        for z in 0..self.h {
            let block = &self.tau[z * data.len()..(z + 1) * data.len()];
            for (acc, t) in data.iter_mut().zip(block) {
                *acc += t;
            }
        }
        for c in &mut data {
            *c /= self.h as f64;
        }
        CostMatrix {
            rows: self.pursuers,
            cols: self.evaders,
            data,
        }
    }
}

/// Stand-in for an unreachable travel time: far beyond any real one.
pub fn infinity_cap(map_diagonal: f64, slowest_speed: f64) -> f64 {
    1e6 * map_diagonal / slowest_speed
}

/// Runs the pipeline of `mode` on one draw of samples.
pub fn assign_from_samples(samples: &TravelTimeSamples, mode: Mode) -> Result<Assignment, AssignmentError> {
    let costs = samples.mean_costs();
    match mode {
        Mode::Ttra => {
            let a0 = hungarian_min_total(&costs)?;
            a0.union(&ttrra(&a0, samples)?)
        }
        Mode::Mtra => {
            let a0 = hungarian_min_max(&costs)?;
            a0.union(&mtrra(&a0, samples)?)
        }
        Mode::Nna => nna(&costs),
    }
}

/// Pursuer-side assignment: sweeps are sourced at the pursuers' cells and
/// evader positions are drawn from the pursuers' beliefs.
#[allow(clippy::too_many_arguments)]
pub fn full_assignment<R: Rng + ?Sized>(
    fields: &[&GeodesicField],
    profiles: &[PursuerProfile],
    evader_beliefs: &[&ProbabilityField],
    mode: Mode,
    h: usize,
    cap: f64,
    rng: &mut R,
) -> Result<Assignment, AssignmentError> {
    if evader_beliefs.is_empty() {
        return Ok(Assignment::empty());
    }
    let samples = sample_travel_times(fields, profiles, evader_beliefs, h, rng).capped(cap);
    assign_from_samples(&samples, mode)
}

/// Evader-side estimate of the pursuers' assignment: sweeps are sourced at
/// the evaders' cells and pursuer positions are drawn from their beliefs.
#[allow(clippy::too_many_arguments)]
pub fn evader_estimate_assignment<R: Rng + ?Sized>(
    evader_fields: &[&GeodesicField],
    pursuer_beliefs: &[&ProbabilityField],
    profiles: &[PursuerProfile],
    mode: Mode,
    h: usize,
    cap: f64,
    rng: &mut R,
) -> Result<Assignment, AssignmentError> {
    if evader_fields.is_empty() {
        return Ok(Assignment::empty());
    }
    let samples = sample_pursuer_travel_times(evader_fields, pursuer_beliefs, profiles, h, rng).capped(cap);
    assign_from_samples(&samples, mode)
}
