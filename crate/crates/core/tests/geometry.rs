use proptest::prelude::*;
use pursuit_core::env::{GridMap, Point2, VertexId};
use pursuit_core::geodesic::{octile_dijkstra, theta_star};
use pursuit_core::pursuer::advance;

fn grid(max_side: usize, density: f64) -> impl Strategy<Value = GridMap> {
    (2..=max_side, 2..=max_side).prop_flat_map(move |(w, h)| {
        prop::collection::vec(prop::bool::weighted(density), w * h)
            .prop_map(move |blocked| GridMap::new(w, h, blocked).unwrap())
    })
}

fn first_free(map: &GridMap, pick: usize) -> Option<VertexId> {
    let free: Vec<VertexId> = map.free_vertices().collect();
    (!free.is_empty()).then(|| free[pick % free.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn theta_star_within_euclidean_and_octile(map in grid(20, 0.25), pick in any::<usize>()) {
        let Some(s) = first_free(&map, pick) else { return Ok(()) };
        let field = theta_star(&map, s).unwrap();
        let octile = octile_dijkstra(&map, s);
        for v in map.free_vertices() {
            let g = field.g(v);
            prop_assert_eq!(g.is_finite(), octile[v.index()].is_finite());
            if g.is_finite() {
                prop_assert!(g >= map.euclidean(s, v) - 1e-9);
                prop_assert!(g <= octile[v.index()] + 1e-9);
            }
        }
    }

    #[test]
    fn parent_chain_is_visible_and_reaches_source(map in grid(16, 0.2), pick in any::<usize>()) {
        let Some(s) = first_free(&map, pick) else { return Ok(()) };
        let field = theta_star(&map, s).unwrap();
        for v in map.free_vertices().filter(|&v| field.is_reached(v) && v != s) {
            let parent = field.came_from(v).unwrap();
            prop_assert!(map.line_of_sight(parent, v));
            prop_assert!((field.g(v) - field.g(parent) - map.euclidean(parent, v)).abs() < 1e-9);
            let second = field.second_from_start(v).unwrap();
            prop_assert_eq!(field.came_from(second), Some(s));
        }
    }

    #[test]
    fn open_maps_are_straight_lines(w in 1usize..24, h in 1usize..24, pick in any::<usize>()) {
        let map = GridMap::open(w, h);
        let s = VertexId((pick % (w * h)) as u32);
        let field = theta_star(&map, s).unwrap();
        for v in map.free_vertices() {
            prop_assert_eq!(field.g(v), map.euclidean(s, v));
        }
    }

    #[test]
    fn line_of_sight_is_symmetric(map in grid(12, 0.3), a in any::<usize>(), b in any::<usize>()) {
        let (Some(a), Some(b)) = (first_free(&map, a), first_free(&map, b)) else { return Ok(()) };
        prop_assert_eq!(map.line_of_sight(a, b), map.line_of_sight(b, a));
    }

    #[test]
    fn signal_distance_bounds(map in grid(12, 0.3), a in any::<usize>(), b in any::<usize>()) {
        let (Some(a), Some(b)) = (first_free(&map, a), first_free(&map, b)) else { return Ok(()) };
        let d = map.euclidean(a, b);
        let eff = map.effective_signal_distance(a, b, 3.0);
        prop_assert!(eff >= d - 1e-9 && eff <= 3.0 * d + 1e-9);
        prop_assert!((eff - map.effective_signal_distance(b, a, 3.0)).abs() < 1e-9);
        if map.line_of_sight(a, b) {
            prop_assert!((eff - d).abs() < 1e-9);
        }
    }

    #[test]
    fn advance_stays_free_and_bounded(
        map in grid(12, 0.3),
        pick in any::<usize>(),
        dx in -2.5f64..2.5,
        dy in -2.5f64..2.5,
    ) {
        let Some(s) = first_free(&map, pick) else { return Ok(()) };
        let from = map.position(s);
        let to = advance(&map, from, Point2::new(dx, dy));
        let cell = map.cell_containing(to);
        prop_assert!(cell.is_some_and(|c| map.is_free(c)), "{:?} -> {:?}", from, to);
        prop_assert!(to.distance(from) <= Point2::new(dx, dy).norm() + 1e-9);
    }
}
