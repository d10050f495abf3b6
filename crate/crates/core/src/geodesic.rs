//! Single-source Theta* sweeps over the whole map.
//!
//! Unlike a goal-directed search the sweep never terminates early: the
//! pursuer controller sums over every vertex with belief mass, so every
//! reachable vertex needs its geodesic distance and first path segment.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::belief::ProbabilityField;
use crate::env::{GridMap, Point2, VertexId};

const UNSET: u32 = u32::MAX;
const IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeodesicError {
    #[error("source {0:?} is an obstacle cell")]
    SourceBlocked(VertexId),
    #[error("no preferred direction: expected velocity vanishes")]
    NoPreferredDirection,
}

#[derive(Debug, Clone)]
pub struct GeodesicField {
    source: VertexId,
    g: Vec<f64>,
    came_from: Vec<u32>,
    second_from_start: Vec<u32>,
}

impl GeodesicField {
    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Geodesic distance from the source (`f64::INFINITY` if unreachable).
    #[inline]
    pub fn g(&self, v: VertexId) -> f64 {
        self.g[v.index()]
    }

    pub fn distances(&self) -> &[f64] {
        &self.g
    }

    pub fn is_reached(&self, v: VertexId) -> bool {
        self.g[v.index()].is_finite()
    }

    pub fn came_from(&self, v: VertexId) -> Option<VertexId> {
        let k = self.came_from[v.index()];
        (k != UNSET).then_some(VertexId(k))
    }

    /// First vertex after the source on the taut path to `v`.
    pub fn second_from_start(&self, v: VertexId) -> Option<VertexId> {
        let k = self.second_from_start[v.index()];
        (k != UNSET).then_some(VertexId(k))
    }
}

#[derive(Debug, PartialEq)]
struct Open {
    g: f64,
    v: u32,
}

impl Eq for Open {}

impl Ord for Open {
    // Min-heap on (g, vertex index).
    fn cmp(&self, other: &Self) -> Ordering {
        other.g.total_cmp(&self.g).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn theta_star(map: &GridMap, source: VertexId) -> Result<GeodesicField, GeodesicError> {
    if !map.is_free(source) {
        return Err(GeodesicError::SourceBlocked(source));
    }
    let n = map.len();
    let mut g = vec![f64::INFINITY; n];
    let mut came_from = vec![UNSET; n];
    let mut second = vec![UNSET; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    g[source.index()] = 0.0;
    came_from[source.index()] = source.0;
    second[source.index()] = source.0;
    open.push(Open { g: 0.0, v: source.0 });

    while let Some(Open { v, .. }) = open.pop() {
        let y = VertexId(v);
        if closed[y.index()] {
            continue;
        }
        closed[y.index()] = true;
        let cf_y = VertexId(came_from[y.index()]);
        for &w in map.neighbors8(y).iter() {
            if closed[w.index()] {
                continue;
            }
            let parent = if map.line_of_sight(cf_y, w) { cf_y } else { y };
            let candidate = g[parent.index()] + map.euclidean(parent, w);
            if candidate < g[w.index()] - IMPROVEMENT {
                g[w.index()] = candidate;
                came_from[w.index()] = parent.0;
                second[w.index()] = if parent != source { second[y.index()] } else { w.0 };
                open.push(Open { g: candidate, v: w.0 });
            }
        }
    }

    Ok(GeodesicField {
        source,
        g,
        came_from,
        second_from_start: second,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedVelocity {
    pub velocity: Point2,
    /// Belief mass on vertices the sweep could not reach.
    pub unreachable_mass: f64,
}

/// Speed-normalized expectation of the geodesic-descent velocity over `belief`.
pub fn expected_velocity(
    map: &GridMap,
    field: &GeodesicField,
    belief: &ProbabilityField,
    v_max: f64,
) -> Result<ExpectedVelocity, GeodesicError> {
    expected_velocity_from(map, field, belief, v_max, map.position(field.source()))
}

/// As [`expected_velocity`], with descent directions taken from `origin`
/// (a point inside the source cell) instead of the source cell center.
pub fn expected_velocity_from(
    map: &GridMap,
    field: &GeodesicField,
    belief: &ProbabilityField,
    v_max: f64,
    origin: Point2,
) -> Result<ExpectedVelocity, GeodesicError> {
    let source = field.source();
    let mut sum = Point2::ZERO;
    let mut unreachable_mass = 0.0;
    for (k, &p) in belief.values().iter().enumerate() {
        let y = VertexId(k as u32);
        if p <= 0.0 || y == source {
            continue;
        }
        let Some(sc) = field.second_from_start(y).filter(|_| field.is_reached(y)) else {
            unreachable_mass += p;
            continue;
        };
        let dir = map.position(sc) - origin;
        let len = dir.norm();
        sum = sum + dir * (2.0 * field.g(y) * p / len);
    }
    let norm = sum.norm();
    if norm < 1e-12 {
        return Err(GeodesicError::NoPreferredDirection);
    }
    Ok(ExpectedVelocity {
        velocity: sum * (v_max / norm),
        unreachable_mass,
    })
}

/// Dijkstra over the 8-connected graph with unit/diagonal edge lengths.
pub fn octile_dijkstra(map: &GridMap, source: VertexId) -> Vec<f64> {
    let mut g = vec![f64::INFINITY; map.len()];
    if !map.is_free(source) {
        return g;
    }
    let mut done = vec![false; map.len()];
    let mut open = BinaryHeap::new();
    g[source.index()] = 0.0;
    open.push(Open { g: 0.0, v: source.0 });
    while let Some(Open { v, g: gv }) = open.pop() {
        let y = VertexId(v);
        if done[y.index()] {
            continue;
        }
        done[y.index()] = true;
        for &w in map.neighbors8(y).iter() {
            let cand = gv + map.euclidean(y, w);
            if cand < g[w.index()] {
                g[w.index()] = cand;
                open.push(Open { g: cand, v: w.0 });
            }
        }
    }
    g
}

/// Theta* fields keyed by source cell, computed on first use.
#[derive(Debug)]
pub struct FieldCache {
    map: Arc<GridMap>,
    slots: Vec<OnceLock<Arc<GeodesicField>>>,
}

impl FieldCache {
    pub fn new(map: Arc<GridMap>) -> Self {
        let slots = (0..map.len()).map(|_| OnceLock::new()).collect();
        FieldCache { map, slots }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn get(&self, source: VertexId) -> Result<Arc<GeodesicField>, GeodesicError> {
        if let Some(f) = self.slots[source.index()].get() {
            return Ok(Arc::clone(f));
        }
        let field = Arc::new(theta_star(&self.map, source)?);
        Ok(Arc::clone(self.slots[source.index()].get_or_init(|| field)))
    }

    pub fn cached_count(&self) -> usize {
        self.slots.iter().filter(|s| s.get().is_some()).count()
    }
}
