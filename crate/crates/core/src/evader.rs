//! Evader decision rules and the motion model pursuers assume for evaders.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{FieldSampler, ProbabilityField, TransitionKernel};
use crate::env::{GridMap, VertexId};
use crate::geodesic::{FieldCache, GeodesicError, GeodesicField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuerProfile {
    pub id: usize,
    pub v_max: f64,
    pub capture_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaderProfile {
    pub id: usize,
    pub v_max: f64,
    /// Width of the Gaussian pursuers use to model this evader's moves.
    pub sigma: f64,
    pub epsilon_near: f64,
    pub epsilon_far: f64,
}

impl EvaderProfile {
    pub fn new(id: usize) -> Self {
        EvaderProfile {
            id,
            v_max: 1.0,
            sigma: 0.3,
            epsilon_near: 0.25,
            epsilon_far: 0.05,
        }
    }

    pub fn epsilon(&self, map: &GridMap, y: VertexId) -> f64 {
        if map.near_obstacle(y) {
            self.epsilon_near
        } else {
            self.epsilon_far
        }
    }
}

/// A pursuer as seen by an evader: its profile and a sweep from its cell.
#[derive(Debug, Clone, Copy)]
pub struct Threat<'a> {
    pub profile: &'a PursuerProfile,
    pub field: &'a GeodesicField,
}

/// Harmonic combination of effective travel times to `y`.
pub fn mean_capture_time(y: VertexId, threats: &[Threat<'_>]) -> f64 {
    let mut rate = 0.0;
    for t in threats {
        let effective = (t.field.g(y) - t.profile.capture_radius).max(0.0);
        if effective == 0.0 {
            return 0.0;
        }
        rate += t.profile.v_max / effective;
    }
    1.0 / rate
}

fn marginal_gain(tau_y: f64, tau_cur: f64, epsilon: f64) -> f64 {
    match (tau_y.is_infinite(), tau_cur.is_infinite()) {
        (true, true) => epsilon,
        (true, false) => f64::INFINITY,
        (false, true) => 0.0,
        (false, false) => (tau_y - tau_cur + epsilon).max(0.0),
    }
}

/// Candidate cells: the current cell and its free 8-neighbors.
pub fn reachable_set(map: &GridMap, y: VertexId) -> Vec<VertexId> {
    let mut cells: Vec<VertexId> = std::iter::once(y).chain(map.neighbors8(y).iter().copied()).collect();
    cells.sort();
    cells
}

/// Cell in `{y_cur} ∪ neighbors8(y_cur)` with the largest marginal increase of
/// the mean capture time; lowest vertex index wins ties.
pub fn best_move(y_cur: VertexId, threats: &[Threat<'_>], profile: &EvaderProfile, map: &GridMap) -> VertexId {
    if threats.is_empty() {
        return y_cur;
    }
    let tau_cur = mean_capture_time(y_cur, threats);
    let mut best = y_cur;
    let mut best_gain = f64::NEG_INFINITY;
    for y in reachable_set(map, y_cur) {
        let gain = marginal_gain(mean_capture_time(y, threats), tau_cur, profile.epsilon(map, y));
        if gain > best_gain {
            best_gain = gain;
            best = y;
        }
    }
    best
}

/// Empirical distribution of best moves over sampled pursuer configurations.
pub fn move_distribution<R: Rng + ?Sized>(
    y_cur: VertexId,
    assigned: &[(PursuerProfile, &ProbabilityField)],
    profile: &EvaderProfile,
    cache: &FieldCache,
    rng: &mut R,
    n_samples: usize,
) -> Result<Vec<(VertexId, f64)>, GeodesicError> {
    let map = cache.map();
    let candidates = reachable_set(map, y_cur);
    if assigned.is_empty() {
        return Ok(vec![(y_cur, 1.0)]);
    }
    let samplers: Vec<FieldSampler> = assigned.iter().map(|(_, q)| FieldSampler::new(q)).collect();
    let mut counts = vec![0usize; candidates.len()];
    let mut fields = Vec::with_capacity(assigned.len());
    for _ in 0..n_samples.max(1) {
        fields.clear();
        for s in &samplers {
            fields.push(cache.get(s.sample(rng))?);
        }
        let threats: Vec<Threat<'_>> = assigned
            .iter()
            .zip(&fields)
            .map(|((p, _), f)| Threat { profile: p, field: f })
            .collect();
        let y = best_move(y_cur, &threats, profile, map);
        let k = candidates.binary_search(&y).expect("best move is a candidate");
        counts[k] += 1;
    }
    let total = counts.iter().sum::<usize>() as f64;
    Ok(candidates
        .into_iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(y, c)| (y, c as f64 / total))
        .collect())
}

/// One stochastic evader transition driven by the pursuer beliefs `q_i` of
/// the pursuers believed to be assigned to this evader.
pub fn stochastic_move<R: Rng + ?Sized>(
    y_cur: VertexId,
    assigned: &[(PursuerProfile, &ProbabilityField)],
    profile: &EvaderProfile,
    cache: &FieldCache,
    rng: &mut R,
    n_samples: usize,
) -> Result<VertexId, GeodesicError> {
    let dist = move_distribution(y_cur, assigned, profile, cache, rng, n_samples)?;
    if dist.len() == 1 {
        return Ok(dist[0].0);
    }
    let index = WeightedIndex::new(dist.iter().map(|(_, p)| *p)).expect("positive weights");
    Ok(dist[index.sample(rng)].0)
}

pub(crate) fn gaussian_column(map: &GridMap, origin: VertexId, center: VertexId, sigma: f64) -> Vec<(VertexId, f64)> {
    let c = map.position(center);
    let weights = reachable_set(map, origin)
        .into_iter()
        .map(|y| {
            let d = map.position(y).distance(c);
            (y, (-d * d / (2.0 * sigma * sigma)).exp())
        })
        .collect();
    TransitionKernel::normalized_column(weights)
}

/// Transition model for an evader chased by `threats` (true pursuer cells):
/// each column is a Gaussian over the evader's candidate cells centered at
/// its deterministic best move.
pub fn build_evader_kernel(threats: &[Threat<'_>], profile: &EvaderProfile, map: &GridMap) -> TransitionKernel {
    let columns = (0..map.len())
        .map(|k| {
            let origin = VertexId(k as u32);
            if !map.is_free(origin) {
                return Vec::new();
            }
            let center = best_move(origin, threats, profile, map);
            gaussian_column(map, origin, center, profile.sigma)
        })
        .collect();
    TransitionKernel::from_columns_unchecked(columns)
}
