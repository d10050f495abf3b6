//! Pursuer control, capture test and the motion model evaders assume for pursuers.

use crate::belief::{ProbabilityField, TransitionKernel};
use crate::env::{GridMap, Point2, VertexId};
use crate::evader::{gaussian_column, reachable_set, PursuerProfile};
use crate::geodesic::{expected_velocity_from, FieldCache, GeodesicError, GeodesicField};

const CLAMP_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuerState {
    pub profile: PursuerProfile,
    pub position: Point2,
    pub cell: VertexId,
}

impl PursuerState {
    /// Pursuer standing on the center of `cell`.
    pub fn at_cell(profile: PursuerProfile, map: &GridMap, cell: VertexId) -> Self {
        PursuerState {
            profile,
            position: map.position(cell),
            cell,
        }
    }
}

/// Largest prefix of `from -> from + d` that stays in free space, found by
/// bisection to `CLAMP_RESOLUTION` in length.
fn clamp_segment(map: &GridMap, from: Point2, d: Point2) -> f64 {
    let len = d.norm();
    if len == 0.0 || map.segment_is_free(from, from + d) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while (hi - lo) * len > CLAMP_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if map.segment_is_free(from, from + d * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Moves from `from` by `displacement`, stopping at the first obstacle. Any
/// remaining displacement is spent sliding along one axis, larger component
/// first, so a pursuer grazing a corner does not stall. The path length never
/// exceeds `displacement.norm()`.
pub fn advance(map: &GridMap, from: Point2, displacement: Point2) -> Point2 {
    let t = clamp_segment(map, from, displacement);
    let reached = from + displacement * t;
    if t >= 1.0 {
        return reached;
    }
    let rest = displacement * (1.0 - t);
    let axes = if rest.x.abs() >= rest.y.abs() {
        [Point2::new(rest.x, 0.0), Point2::new(0.0, rest.y)]
    } else {
        [Point2::new(0.0, rest.y), Point2::new(rest.x, 0.0)]
    };
    for slide in axes {
        if slide.norm() <= CLAMP_RESOLUTION {
            continue;
        }
        let s = clamp_segment(map, reached, slide);
        if s * slide.norm() > CLAMP_RESOLUTION {
            return reached + slide * s;
        }
    }
    reached
}

fn settle(s: &PursuerState, map: &GridMap, position: Point2) -> PursuerState {
    let cell = map
        .cell_containing(position)
        .filter(|c| map.is_free(*c))
        .unwrap_or(s.cell);
    PursuerState { position, cell, ..*s }
}

/// One control step against the belief `p_target` using a sweep already
/// sourced at `s.cell`.
pub fn control_step_with_field(
    s: &PursuerState,
    p_target: &ProbabilityField,
    map: &GridMap,
    field: &GeodesicField,
) -> PursuerState {
    match expected_velocity_from(map, field, p_target, s.profile.v_max, s.position) {
        Ok(v) => settle(s, map, advance(map, s.position, v.velocity)),
        Err(_) => *s,
    }
}

pub fn control_step(
    s: &PursuerState,
    p_target: &ProbabilityField,
    cache: &FieldCache,
) -> Result<PursuerState, GeodesicError> {
    let field = cache.get(s.cell)?;
    Ok(control_step_with_field(s, p_target, cache.map(), &field))
}

/// Closed capture disk around the pursuer's continuous position.
pub fn capture_check(s: &PursuerState, evader_cell: VertexId, map: &GridMap) -> bool {
    s.position.distance(map.position(evader_cell)) <= s.profile.capture_radius + 1e-12
}

/// Cell in `{r'} ∪ neighbors8(r')` nearest to where a pursuer at `r'` would be
/// after one step down the sweep toward the evader.
pub fn tentative_next_cell(map: &GridMap, field: &GeodesicField, r: VertexId, v_max: f64) -> VertexId {
    let Some(parent) = field
        .came_from(r)
        .filter(|_| field.is_reached(r) && r != field.source())
    else {
        return r;
    };
    let from = map.position(r);
    let dir = map.position(parent) - from;
    let len = dir.norm();
    let target = from + dir * (v_max.min(len) / len);
    let mut best = r;
    let mut best_d = f64::INFINITY;
    for y in reachable_set(map, r) {
        let d = map.position(y).distance(target);
        if d < best_d - 1e-12 {
            best_d = d;
            best = y;
        }
    }
    best
}

/// Transition model for a pursuer chasing the evader whose sweep is `field`.
pub fn build_pursuer_kernel_with_field(
    field: &GeodesicField,
    profile: &PursuerProfile,
    map: &GridMap,
    sigma: f64,
) -> TransitionKernel {
    let columns = (0..map.len())
        .map(|k| {
            let origin = VertexId(k as u32);
            if !map.is_free(origin) {
                return Vec::new();
            }
            if !field.is_reached(origin) {
                return vec![(origin, 1.0)];
            }
            let center = tentative_next_cell(map, field, origin, profile.v_max);
            gaussian_column(map, origin, center, sigma)
        })
        .collect();
    TransitionKernel::from_columns_unchecked(columns)
}

pub fn build_pursuer_kernel(
    evader_cell: VertexId,
    profile: &PursuerProfile,
    cache: &FieldCache,
    sigma: f64,
) -> Result<TransitionKernel, GeodesicError> {
    let field = cache.get(evader_cell)?;
    Ok(build_pursuer_kernel_with_field(&field, profile, cache.map(), sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn v(m: &GridMap, c: usize, r: usize) -> VertexId {
        m.vertex(c, r).unwrap()
    }

    fn profile(v_max: f64, radius: f64) -> PursuerProfile {
        PursuerProfile {
            id: 0,
            v_max,
            capture_radius: radius,
        }
    }

    #[test]
    fn moves_straight_at_visible_target() {
        let m = Arc::new(GridMap::open(20, 20));
        let cache = FieldCache::new(Arc::clone(&m));
        let s = PursuerState::at_cell(profile(2.0, 1.0), &m, v(&m, 2, 3));
        let target = v(&m, 8, 11);
        let next = control_step(&s, &ProbabilityField::point_mass(&m, target), &cache).unwrap();
        let step = next.position - s.position;
        assert!((step.norm() - 2.0).abs() < 1e-12);
        assert!((step.x - 1.2).abs() < 1e-12 && (step.y - 1.6).abs() < 1e-12);
        assert_eq!(next.cell, v(&m, 3, 5));
    }

    #[test]
    fn source_mass_leaves_position_unchanged() {
        let m = Arc::new(GridMap::open(5, 5));
        let cache = FieldCache::new(Arc::clone(&m));
        let s = PursuerState::at_cell(profile(2.0, 1.0), &m, v(&m, 2, 2));
        let next = control_step(&s, &ProbabilityField::point_mass(&m, v(&m, 2, 2)), &cache).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn wall_stops_the_segment() {
        // Cell (1,0) is blocked; its face is at x = 0.5, 0.7 units away.
        let m = GridMap::from_rows(&[".@."]).unwrap();
        let end = advance(&m, Point2::new(-0.2, 0.0), Point2::new(2.0, 0.0));
        assert!((end.x - 0.5).abs() < 1e-6 && end.x < 0.5);
        assert_eq!(end.y, 0.0);
    }

    #[test]
    fn grazing_a_corner_slides() {
        // Moving NE from just below a wall row: the x component survives.
        let m = GridMap::from_rows(&["@@@@", "....", "...."]).unwrap();
        let from = Point2::new(0.0, 1.0);
        let end = advance(&m, from, Point2::new(1.0, -1.0));
        assert!(m.segment_is_free(from, end));
        assert!(end.y >= 0.5 && end.y < 0.5 + 1e-5, "{end:?}");
        assert!(end.x > 0.5);
        let travelled = (end - Point2::new(0.5, 0.5)).norm() + (Point2::new(0.5, 0.5) - from).norm();
        assert!(travelled <= 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn capture_disk_is_closed() {
        let m = GridMap::open(10, 1);
        let s = PursuerState::at_cell(profile(1.0, 2.0), &m, v(&m, 3, 0));
        assert!(capture_check(&s, v(&m, 3, 0), &m));
        assert!(capture_check(&s, v(&m, 5, 0), &m));
        let moved = PursuerState {
            position: Point2::new(2.99, 0.0),
            ..s
        };
        assert!(!capture_check(&moved, v(&m, 5, 0), &m));
    }

    #[test]
    fn geodesic_distance_decreases_under_static_belief() {
        let m = Arc::new(
            GridMap::from_rows(&[
                "..........",
                "..........",
                "...@@@@...",
                "......@...",
                "......@...",
                "..........",
            ])
            .unwrap(),
        );
        let cache = FieldCache::new(Arc::clone(&m));
        let target = v(&m, 8, 4);
        let to_target = cache.get(target).unwrap();
        let belief = ProbabilityField::point_mass(&m, target);
        let mut s = PursuerState::at_cell(profile(1.0, 1.0), &m, v(&m, 1, 0));
        for _ in 0..40 {
            if to_target.g(s.cell) <= 1.0 {
                break;
            }
            let next = control_step(&s, &belief, &cache).unwrap();
            assert!((next.position - s.position).norm() <= 1.0 + 1e-9);
            assert!(m.is_free(next.cell));
            assert!(to_target.g(next.cell) <= to_target.g(s.cell) + 1e-9);
            s = next;
        }
        assert!(to_target.g(s.cell) <= 1.5);
    }

    #[test]
    fn kernel_points_at_evader_next_door() {
        let m = Arc::new(GridMap::open(5, 5));
        let cache = FieldCache::new(Arc::clone(&m));
        let e = v(&m, 2, 2);
        for sigma in [1e-6, 0.3] {
            let k = build_pursuer_kernel(e, &profile(1.0, 1.0), &cache, sigma).unwrap();
            for r in [v(&m, 3, 2), v(&m, 3, 3), v(&m, 1, 1)] {
                let col = k.column(r);
                let (top, w) = col.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
                assert_eq!(top, e);
                if sigma < 1e-3 {
                    assert!((w - 1.0).abs() < 1e-12);
                }
                assert!((col.iter().map(|c| c.1).sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        // Far cell: two steps toward (2,2) from (4,4) at speed 1 lands on (3,3).
        let f = cache.get(e).unwrap();
        assert_eq!(tentative_next_cell(&m, &f, v(&m, 4, 4), 1.0), v(&m, 3, 3));
        assert_eq!(tentative_next_cell(&m, &f, v(&m, 4, 2), 1.0), v(&m, 3, 2));
    }

    #[test]
    fn walled_off_cells_stay_put() {
        let m = Arc::new(GridMap::from_rows(&["..@.", "..@.", "@@@."]).unwrap());
        let cache = FieldCache::new(Arc::clone(&m));
        let k = build_pursuer_kernel(v(&m, 0, 0), &profile(1.5, 1.0), &cache, 0.3).unwrap();
        assert_eq!(k.column(v(&m, 3, 1)), &[(v(&m, 3, 1), 1.0)]);
        assert!(k.column(v(&m, 2, 0)).is_empty());
    }
}
