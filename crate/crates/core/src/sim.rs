//! Discrete-time episodes: measure, update beliefs, assign, move, capture.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{evader_estimate_assignment, full_assignment, infinity_cap, Assignment, Mode};
use crate::belief::{
    bayes_update_cached, predict, BeliefError, ProbabilityField, Reading, SensorModel, TransitionKernel,
};
use crate::env::{GridMap, SignalDistanceTable, VertexId};
use crate::evader::{build_evader_kernel, stochastic_move, EvaderProfile, PursuerProfile, Threat};
use crate::geodesic::{FieldCache, GeodesicField};
use crate::pursuer::{build_pursuer_kernel_with_field, capture_check, control_step, PursuerState};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

const STREAM_SPAWN: u64 = 0;
const STREAM_SIGNALS: u64 = 1;
const STREAM_PURSUER_SAMPLING: u64 = 2;
const STREAM_EVADER_SAMPLING: u64 = 3;
const STREAM_EVADER_MOVES: u64 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot place agents: {0}")]
    Spawn(String),
    #[error(transparent)]
    Sensor(#[from] BeliefError),
}

/// A map with the caches every episode on it can share. Both caches hold
/// pure functions of the map, so sharing them does not affect results.
#[derive(Debug)]
pub struct World {
    map: Arc<GridMap>,
    fields: FieldCache,
    signal: SignalDistanceTable,
}

impl World {
    pub fn new(map: GridMap, rho_obs: f64) -> Self {
        let map = Arc::new(map);
        World {
            fields: FieldCache::new(Arc::clone(&map)),
            signal: SignalDistanceTable::new(&map, rho_obs),
            map,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn fields(&self) -> &FieldCache {
        &self.fields
    }

    pub fn rho_obs(&self) -> f64 {
        self.signal.rho_obs()
    }

    fn field(&self, v: VertexId) -> Arc<GeodesicField> {
        self.fields.get(v).expect("agents stand on free cells")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpawnRule {
    /// Any free cell of the largest connected region.
    Uniform,
    /// Free cells within `radius` of the map center.
    CentralDisk { radius: f64 },
    /// Free cells farther than `radius` from the map center.
    OutsideCentralDisk { radius: f64 },
    /// Explicit `[col, row]` cells, one per agent.
    Fixed { cells: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PursuerTeam {
    pub count: usize,
    pub speed_min: f64,
    pub speed_max: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Width of the Gaussian evaders use to predict pursuer moves.
    pub model_sigma: f64,
    pub spawn: SpawnRule,
}

impl Default for PursuerTeam {
    fn default() -> Self {
        PursuerTeam {
            count: 5,
            speed_min: 1.2,
            speed_max: 2.0,
            radius_min: 1.0,
            radius_max: 2.0,
            model_sigma: 0.3,
            spawn: SpawnRule::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaderTeam {
    pub count: usize,
    pub speed: f64,
    /// Width of the Gaussian pursuers use to predict evader moves.
    pub model_sigma: f64,
    pub epsilon_near: f64,
    pub epsilon_far: f64,
    /// Pursuer configurations sampled per evader decision.
    pub move_samples: usize,
    pub spawn: SpawnRule,
}

impl Default for EvaderTeam {
    fn default() -> Self {
        EvaderTeam {
            count: 3,
            speed: 1.0,
            model_sigma: 0.3,
            epsilon_near: 0.25,
            epsilon_far: 0.05,
            move_samples: 100,
            spawn: SpawnRule::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    pub k1: f64,
    pub k2: f64,
    pub rho_obs: f64,
    /// Mass added to every free cell after each measurement update.
    pub belief_floor: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams {
            k1: 10.0,
            k2: 0.3,
            rho_obs: 3.0,
            belief_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub pursuers: PursuerTeam,
    pub evaders: EvaderTeam,
    pub sensor: SensorParams,
    pub mode: Mode,
    /// Joint travel-time samples per assignment.
    pub samples: usize,
    /// Defaults to 20 map diagonals at the slowest pursuer speed.
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            pursuers: PursuerTeam::default(),
            evaders: EvaderTeam::default(),
            sensor: SensorParams::default(),
            mode: Mode::Ttra,
            samples: 50,
            max_steps: None,
            seed: 0,
            record_trace: true,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        let p = &self.pursuers;
        let e = &self.evaders;
        if e.count == 0 {
            return bad("at least one evader is required".into());
        }
        if p.count <= e.count {
            return bad(format!("{} pursuers must outnumber {} evaders", p.count, e.count));
        }
        if !(p.speed_min > 0.0 && p.speed_min <= p.speed_max) {
            return bad(format!(
                "pursuer speed range [{}, {}] is empty",
                p.speed_min, p.speed_max
            ));
        }
        if !(p.radius_min >= 0.0 && p.radius_min <= p.radius_max) {
            return bad(format!(
                "capture radius range [{}, {}] is empty",
                p.radius_min, p.radius_max
            ));
        }
        if !(e.speed > 0.0) {
            return bad("evader speed must be positive".into());
        }
        if p.speed_min <= e.speed {
            return bad(format!(
                "pursuer speed {} must exceed evader speed {}",
                p.speed_min, e.speed
            ));
        }
        if !(p.model_sigma > 0.0 && e.model_sigma > 0.0) {
            return bad("model_sigma must be positive".into());
        }
        for eps in [e.epsilon_near, e.epsilon_far] {
            if !(eps > 0.0 && eps < 0.3) {
                return bad(format!("epsilon {eps} outside (0, 0.3)"));
            }
        }
        if e.move_samples == 0 || self.samples == 0 {
            return bad("sample counts must be at least 1".into());
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be at least 1".into());
        }
        let s = &self.sensor;
        SensorModel::new(s.k1, s.k2, s.rho_obs).map_err(|err| SimError::Config(err.to_string()))?;
        if !(s.belief_floor >= 0.0 && s.belief_floor < 1e-3) {
            return bad(format!("belief_floor {} outside [0, 1e-3)", s.belief_floor));
        }
        for (team, rule, count) in [("pursuers", &p.spawn, p.count), ("evaders", &e.spawn, e.count)] {
            if let SpawnRule::Fixed { cells } = rule {
                if cells.len() != count {
                    return bad(format!("{team}: {} fixed cells for {count} agents", cells.len()));
                }
            }
        }
        Ok(())
    }

    pub fn resolved_max_steps(&self, map: &GridMap) -> usize {
        self.max_steps
            .unwrap_or_else(|| (20.0 * map.diagonal() / self.pursuers.speed_min).ceil() as usize)
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Cells of the largest 8-connected free region, ascending.
pub fn largest_component(map: &GridMap) -> Vec<VertexId> {
    let mut label = vec![usize::MAX; map.len()];
    let mut best: Vec<VertexId> = Vec::new();
    for start in map.free_vertices() {
        if label[start.index()] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        label[start.index()] = start.index();
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in map.neighbors8(v).iter() {
                if label[w.index()] == usize::MAX {
                    label[w.index()] = start.index();
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        if members.len() > best.len() {
            best = members;
        }
    }
    best.sort();
    best
}

fn spawn_cells<R: Rng + ?Sized>(
    map: &GridMap,
    region: &[VertexId],
    rule: &SpawnRule,
    count: usize,
    taken: &mut Vec<VertexId>,
    rng: &mut R,
) -> Result<Vec<VertexId>, SimError> {
    if let SpawnRule::Fixed { cells } = rule {
        let mut out = Vec::with_capacity(cells.len());
        for &[c, r] in cells {
            let v = map
                .vertex(c, r)
                .filter(|v| map.is_free(*v))
                .ok_or_else(|| SimError::Spawn(format!("cell ({c}, {r}) is not a free cell")))?;
            out.push(v);
        }
        taken.extend(&out);
        return Ok(out);
    }
    let center = crate::env::Point2::new(
        (map.width() as f64 - 1.0) * 0.5 * map.cell_size(),
        (map.height() as f64 - 1.0) * 0.5 * map.cell_size(),
    );
    let mut pool: Vec<VertexId> = region
        .iter()
        .copied()
        .filter(|v| !taken.contains(v))
        .filter(|v| {
            let d = map.position(*v).distance(center);
            match rule {
                SpawnRule::CentralDisk { radius } => d <= *radius,
                SpawnRule::OutsideCentralDisk { radius } => d > *radius,
                _ => true,
            }
        })
        .collect();
    if pool.len() < count {
        return Err(SimError::Spawn(format!(
            "{count} agents but only {} admissible cells",
            pool.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.random_range(0..pool.len());
        out.push(pool.swap_remove(k));
    }
    taken.extend(&out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaderState {
    pub profile: EvaderProfile,
    pub cell: VertexId,
    pub captured_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuerRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub cell: [usize; 2],
    pub target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaderRecord {
    pub id: usize,
    pub cell: [usize; 2],
    pub captured: bool,
    /// Entropy in nats of the pursuers' belief about this evader.
    pub entropy: Option<f64>,
}

/// One line of `trace.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub schema_version: u32,
    pub step: usize,
    pub pursuers: Vec<PursuerRecord>,
    pub evaders: Vec<EvaderRecord>,
    pub captures: Vec<usize>,
    pub assignment: Vec<[usize; 2]>,
    pub evader_estimate: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub mode: Mode,
    pub seed: u64,
    pub steps: usize,
    pub capture_steps: Vec<Option<usize>>,
    pub timed_out: bool,
    /// Sum of capture steps; absent on timeout.
    pub total_capture_time: Option<usize>,
    /// Last capture step; absent on timeout.
    pub max_capture_time: Option<usize>,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

/// A running episode.
pub struct Episode<'w> {
    world: &'w World,
    cfg: EpisodeConfig,
    sensor: SensorModel,
    max_steps: usize,
    cap: f64,
    step: usize,
    pursuers: Vec<PursuerState>,
    evaders: Vec<EvaderState>,
    /// Pursuers' beliefs about each evader; dropped on capture.
    p: Vec<Option<ProbabilityField>>,
    /// Evaders' shared beliefs about each pursuer.
    q: Vec<ProbabilityField>,
    assignment: Assignment,
    estimate: Assignment,
    still: TransitionKernel,
    rng_signals: ChaCha8Rng,
    rng_pursuer: ChaCha8Rng,
    rng_evader: ChaCha8Rng,
    rng_moves: ChaCha8Rng,
    trace: Vec<TraceRecord>,
}

impl<'w> Episode<'w> {
    pub fn new(world: &'w World, cfg: &EpisodeConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        if cfg.sensor.rho_obs != world.rho_obs() {
            return Err(SimError::Config(format!(
                "rho_obs {} differs from the world's {}",
                cfg.sensor.rho_obs,
                world.rho_obs()
            )));
        }
        let map = world.map();
        let sensor = SensorModel::new(cfg.sensor.k1, cfg.sensor.k2, cfg.sensor.rho_obs)?;
        let mut rng = stream(cfg.seed, STREAM_SPAWN);
        let pt = &cfg.pursuers;
        let profiles: Vec<PursuerProfile> = (0..pt.count)
            .map(|id| PursuerProfile {
                id,
                v_max: uniform(&mut rng, pt.speed_min, pt.speed_max),
                capture_radius: uniform(&mut rng, pt.radius_min, pt.radius_max),
            })
            .collect();
        let region = largest_component(map);
        let mut taken = Vec::new();
        let p_cells = spawn_cells(map, &region, &pt.spawn, pt.count, &mut taken, &mut rng)?;
        let e_cells = spawn_cells(
            map,
            &region,
            &cfg.evaders.spawn,
            cfg.evaders.count,
            &mut taken,
            &mut rng,
        )?;
        let et = &cfg.evaders;
        let evaders = e_cells
            .into_iter()
            .enumerate()
            .map(|(id, cell)| EvaderState {
                profile: EvaderProfile {
                    id,
                    v_max: et.speed,
                    sigma: et.model_sigma,
                    epsilon_near: et.epsilon_near,
                    epsilon_far: et.epsilon_far,
                },
                cell,
                captured_at: None,
            })
            .collect::<Vec<_>>();
        let pursuers = profiles
            .into_iter()
            .zip(p_cells)
            .map(|(profile, cell)| PursuerState::at_cell(profile, map, cell))
            .collect::<Vec<_>>();
        let uniform_belief = ProbabilityField::uniform(map);
        let mut episode = Episode {
            world,
            sensor,
            max_steps: cfg.resolved_max_steps(map),
            cap: infinity_cap(map.diagonal(), pt.speed_min),
            step: 0,
            p: vec![Some(uniform_belief.clone()); evaders.len()],
            q: vec![uniform_belief; pursuers.len()],
            pursuers,
            evaders,
            assignment: Assignment::empty(),
            estimate: Assignment::empty(),
            still: TransitionKernel::lazy_walk(map),
            rng_signals: stream(cfg.seed, STREAM_SIGNALS),
            rng_pursuer: stream(cfg.seed, STREAM_PURSUER_SAMPLING),
            rng_evader: stream(cfg.seed, STREAM_EVADER_SAMPLING),
            rng_moves: stream(cfg.seed, STREAM_EVADER_MOVES),
            trace: Vec::new(),
            cfg: cfg.clone(),
        };
        episode.reassign();
        Ok(episode)
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn pursuers(&self) -> &[PursuerState] {
        &self.pursuers
    }

    pub fn evaders(&self) -> &[EvaderState] {
        &self.evaders
    }

    pub fn pursuer_beliefs(&self) -> impl Iterator<Item = &ProbabilityField> {
        self.p.iter().flatten()
    }

    pub fn evader_beliefs(&self) -> &[ProbabilityField] {
        &self.q
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn evader_estimate(&self) -> &Assignment {
        &self.estimate
    }

    pub fn all_captured(&self) -> bool {
        self.evaders.iter().all(|e| e.captured_at.is_some())
    }

    pub fn is_done(&self) -> bool {
        self.all_captured() || self.step >= self.max_steps
    }

    fn active(&self) -> Vec<usize> {
        (0..self.evaders.len())
            .filter(|&j| self.evaders[j].captured_at.is_none())
            .collect()
    }

    /// Advances one step and returns its trace record.
    pub fn step(&mut self) -> TraceRecord {
        assert!(!self.all_captured(), "step called with every evader captured");
        self.step += 1;
        let mut captures = self.check_captures();
        if !self.all_captured() {
            let (pursuer_readings, evader_readings) = self.measure();
            self.update_pursuer_beliefs(&pursuer_readings);
            self.update_evader_beliefs(&evader_readings);
            self.reassign();
            self.act();
            captures.extend(self.check_captures());
        }
        let record = self.record(captures);
        if self.cfg.record_trace {
            self.trace.push(record.clone());
        }
        record
    }

    fn check_captures(&mut self) -> Vec<usize> {
        let map = self.world.map();
        let mut out = Vec::new();
        for j in self.active() {
            if self
                .pursuers
                .iter()
                .any(|s| capture_check(s, self.evaders[j].cell, map))
            {
                self.evaders[j].captured_at = Some(self.step);
                self.p[j] = None;
                out.push(j);
            }
        }
        out
    }

    /// Readings grouped by the belief they update: `[j]` for the pursuers'
    /// belief about evader `j`, `[i]` for the evaders' belief about pursuer `i`.
    fn measure(&mut self) -> (Vec<Vec<Reading>>, Vec<Vec<Reading>>) {
        let map = self.world.map();
        let table = &self.world.signal;
        let mut on_evaders = vec![Vec::new(); self.evaders.len()];
        let mut on_pursuers = vec![Vec::new(); self.pursuers.len()];
        for j in self.active() {
            let y = self.evaders[j].cell;
            for (i, s) in self.pursuers.iter().enumerate() {
                let d_p = table.row(map, s.cell)[y.index()];
                if d_p > 0.0 {
                    on_evaders[j].push(Reading {
                        sensor_at: s.cell,
                        signal: self.sensor.sample(d_p, &mut self.rng_signals),
                    });
                }
                let d_e = table.row(map, y)[s.cell.index()];
                if d_e > 0.0 {
                    on_pursuers[i].push(Reading {
                        sensor_at: y,
                        signal: self.sensor.sample(d_e, &mut self.rng_signals),
                    });
                }
            }
        }
        (on_evaders, on_pursuers)
    }

    fn refine(&self, prior: ProbabilityField, readings: &[Reading]) -> ProbabilityField {
        let map = self.world.map();
        let posterior = bayes_update_cached(&prior, &self.sensor, map, &self.world.signal, readings).unwrap_or(prior);
        posterior.with_floor(map, self.cfg.sensor.belief_floor)
    }

    fn update_pursuer_beliefs(&mut self, readings: &[Vec<Reading>]) {
        let map = self.world.map();
        for j in self.active() {
            let chasers = self.assignment.pursuers_of(j);
            let fields: Vec<_> = chasers
                .iter()
                .map(|&i| self.world.field(self.pursuers[i].cell))
                .collect();
            let threats: Vec<Threat<'_>> = chasers
                .iter()
                .zip(&fields)
                .map(|(&i, f)| Threat {
                    profile: &self.pursuers[i].profile,
                    field: f,
                })
                .collect();
            let kernel = build_evader_kernel(&threats, &self.evaders[j].profile, map);
            let prior = predict(self.p[j].as_ref().expect("active evader has a belief"), &kernel);
            self.p[j] = Some(self.refine(prior, &readings[j]));
        }
    }

    fn update_evader_beliefs(&mut self, readings: &[Vec<Reading>]) {
        let map = self.world.map();
        for i in 0..self.pursuers.len() {
            let target = self
                .estimate
                .evader_of(i)
                .filter(|&j| self.evaders[j].captured_at.is_none());
            let prior = match target {
                Some(j) => {
                    let field = self.world.field(self.evaders[j].cell);
                    let kernel = build_pursuer_kernel_with_field(
                        &field,
                        &self.pursuers[i].profile,
                        map,
                        self.cfg.pursuers.model_sigma,
                    );
                    predict(&self.q[i], &kernel)
                }
                None => predict(&self.q[i], &self.still),
            };
            self.q[i] = self.refine(prior, &readings[i]);
        }
    }

    fn reassign(&mut self) {
        let active = self.active();
        if active.is_empty() {
            return;
        }
        let all_pursuers: Vec<usize> = (0..self.pursuers.len()).collect();
        let profiles: Vec<PursuerProfile> = self.pursuers.iter().map(|s| s.profile).collect();

        let p_fields: Vec<_> = self.pursuers.iter().map(|s| self.world.field(s.cell)).collect();
        let p_refs: Vec<&GeodesicField> = p_fields.iter().map(|f| f.as_ref()).collect();
        let beliefs: Vec<&ProbabilityField> = active.iter().map(|&j| self.p[j].as_ref().expect("active")).collect();
        if let Ok(a) = full_assignment(
            &p_refs,
            &profiles,
            &beliefs,
            self.cfg.mode,
            self.cfg.samples,
            self.cap,
            &mut self.rng_pursuer,
        ) {
            self.assignment = a.remap(&all_pursuers, &active);
        }

        let e_fields: Vec<_> = active.iter().map(|&j| self.world.field(self.evaders[j].cell)).collect();
        let e_refs: Vec<&GeodesicField> = e_fields.iter().map(|f| f.as_ref()).collect();
        let q_refs: Vec<&ProbabilityField> = self.q.iter().collect();
        if let Ok(a) = evader_estimate_assignment(
            &e_refs,
            &q_refs,
            &profiles,
            self.cfg.mode,
            self.cfg.samples,
            self.cap,
            &mut self.rng_evader,
        ) {
            self.estimate = a.remap(&all_pursuers, &active);
        }
    }

    fn act(&mut self) {
        let cache = self.world.fields();
        for j in self.active() {
            let assigned: Vec<(PursuerProfile, &ProbabilityField)> = self
                .estimate
                .pursuers_of(j)
                .into_iter()
                .map(|i| (self.pursuers[i].profile, &self.q[i]))
                .collect();
            let e = &self.evaders[j];
            if let Ok(y) = stochastic_move(
                e.cell,
                &assigned,
                &e.profile,
                cache,
                &mut self.rng_moves,
                self.cfg.evaders.move_samples,
            ) {
                self.evaders[j].cell = y;
            }
        }
        for i in 0..self.pursuers.len() {
            let Some(j) = self.assignment.evader_of(i) else {
                continue;
            };
            let Some(belief) = self.p[j].as_ref() else { continue };
            if let Ok(next) = control_step(&self.pursuers[i], belief, cache) {
                self.pursuers[i] = next;
            }
        }
    }

    fn record(&self, captures: Vec<usize>) -> TraceRecord {
        let map = self.world.map();
        let cell = |v: VertexId| {
            let (c, r) = map.coords(v);
            [c, r]
        };
        let pairs = |a: &Assignment| a.pairs().iter().map(|&(i, j)| [i, j]).collect();
        TraceRecord {
            schema_version: TRACE_SCHEMA_VERSION,
            step: self.step,
            pursuers: self
                .pursuers
                .iter()
                .enumerate()
                .map(|(id, s)| PursuerRecord {
                    id,
                    x: s.position.x,
                    y: s.position.y,
                    cell: cell(s.cell),
                    target: self.assignment.evader_of(id),
                })
                .collect(),
            evaders: self
                .evaders
                .iter()
                .enumerate()
                .map(|(id, e)| EvaderRecord {
                    id,
                    cell: cell(e.cell),
                    captured: e.captured_at.is_some(),
                    entropy: self.p[id].as_ref().map(ProbabilityField::entropy),
                })
                .collect(),
            captures,
            assignment: pairs(&self.assignment),
            evader_estimate: pairs(&self.estimate),
        }
    }

    pub fn into_result(self) -> EpisodeResult {
        let capture_steps: Vec<Option<usize>> = self.evaders.iter().map(|e| e.captured_at).collect();
        let timed_out = capture_steps.iter().any(Option::is_none);
        let (total, max) = if timed_out {
            (None, None)
        } else {
            let steps = capture_steps.iter().flatten();
            (Some(steps.clone().sum()), steps.max().copied())
        };
        EpisodeResult {
            mode: self.cfg.mode,
            seed: self.cfg.seed,
            steps: self.step,
            capture_steps,
            timed_out,
            total_capture_time: total,
            max_capture_time: max,
            trace: self.trace,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

pub fn run_episode(world: &World, cfg: &EpisodeConfig) -> Result<EpisodeResult, SimError> {
    let mut episode = Episode::new(world, cfg)?;
    while !episode.is_done() {
        episode.step();
    }
    Ok(episode.into_result())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: Mode,
    /// Episodes that captured every evader.
    pub n: usize,
    pub mean_total: Option<f64>,
    pub std_total: Option<f64>,
    pub mean_max: Option<f64>,
    pub std_max: Option<f64>,
    pub timeouts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Total,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinRate {
    pub mode: Mode,
    pub baseline: Mode,
    pub metric: Metric,
    pub wins: usize,
    pub runs: usize,
}

impl WinRate {
    pub fn rate(&self) -> f64 {
        self.wins as f64 / self.runs as f64
    }
}

/// Results of every mode on every seed; `results[m][k]` is mode `m`, seed `k`.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
    pub results: Vec<Vec<EpisodeResult>>,
}

/// Sample mean and standard deviation (n - 1 divisor); the deviation needs two values.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some(var.sqrt()))
}

fn metric_of(r: &EpisodeResult, metric: Metric) -> Option<usize> {
    match metric {
        Metric::Total => r.total_capture_time,
        Metric::Max => r.max_capture_time,
    }
}

impl BatchOutcome {
    pub fn summaries(&self) -> Vec<ModeSummary> {
        self.modes
            .iter()
            .zip(&self.results)
            .map(|(&mode, runs)| {
                let done: Vec<&EpisodeResult> = runs.iter().filter(|r| !r.timed_out).collect();
                let totals: Vec<f64> = done
                    .iter()
                    .filter_map(|r| r.total_capture_time)
                    .map(|t| t as f64)
                    .collect();
                let maxes: Vec<f64> = done
                    .iter()
                    .filter_map(|r| r.max_capture_time)
                    .map(|t| t as f64)
                    .collect();
                let (mean_total, std_total) = mean_std(&totals);
                let (mean_max, std_max) = mean_std(&maxes);
                ModeSummary {
                    mode,
                    n: done.len(),
                    mean_total,
                    std_total,
                    mean_max,
                    std_max,
                    timeouts: runs.len() - done.len(),
                }
            })
            .collect()
    }

    fn runs_of(&self, mode: Mode) -> Option<&[EpisodeResult]> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .map(|k| self.results[k].as_slice())
    }

    /// Paired comparison on one metric. A run is a win when `mode` finishes
    /// and either the baseline times out or `mode` is strictly faster.
    pub fn win_rate(&self, mode: Mode, baseline: Mode, metric: Metric) -> Option<WinRate> {
        let ours = self.runs_of(mode)?;
        let theirs = self.runs_of(baseline)?;
        let wins = ours
            .iter()
            .zip(theirs)
            .filter(|(a, b)| match (metric_of(a, metric), metric_of(b, metric)) {
                (Some(x), Some(y)) => x < y,
                (Some(_), None) => true,
                _ => false,
            })
            .count();
        Some(WinRate {
            mode,
            baseline,
            metric,
            wins,
            runs: ours.len(),
        })
    }

    /// TTRA against NNA on total time and MTRA against NNA on max time,
    /// for whichever of those modes were run.
    pub fn standard_win_rates(&self) -> Vec<WinRate> {
        [(Mode::Ttra, Metric::Total), (Mode::Mtra, Metric::Max)]
            .into_iter()
            .filter_map(|(m, metric)| self.win_rate(m, Mode::Nna, metric))
            .collect()
    }
}

/// Runs every mode on every seed. Initial conditions depend on the seed only,
/// so all modes of one seed start from the same placement.
pub fn run_batch(
    world: &World,
    template: &EpisodeConfig,
    modes: &[Mode],
    seeds: &[u64],
) -> Result<BatchOutcome, SimError> {
    let mut results = Vec::with_capacity(modes.len());
    for &mode in modes {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let cfg = EpisodeConfig {
                mode,
                seed,
                ..template.clone()
            };
            runs.push(run_episode(world, &cfg)?);
        }
        results.push(runs);
    }
    Ok(BatchOutcome {
        modes: modes.to_vec(),
        seeds: seeds.to_vec(),
        results,
    })
}
