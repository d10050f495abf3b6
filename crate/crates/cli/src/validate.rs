//! Randomized oracle checks behind `pursuit validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pursuit_core::assignment::{hungarian_min_max, hungarian_min_total, CostMatrix};
use pursuit_core::belief::TransitionKernel;
use pursuit_core::env::{GridMap, VertexId};
use pursuit_core::evader::{build_evader_kernel, EvaderProfile, PursuerProfile, Threat};
use pursuit_core::geodesic::{octile_dijkstra, theta_star};
use pursuit_core::pursuer::build_pursuer_kernel_with_field;

pub struct Report {
    pub lines: Vec<String>,
    pub failures: usize,
}

type Check = fn(&mut ChaCha8Rng, bool) -> Result<(), String>;

fn rng_for(seed: u64, property: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (case as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(property);
    rng
}

/// Calls `f` on every injective map from `0..cols` into `0..rows`.
fn for_each_injection(rows: usize, cols: usize, f: &mut impl FnMut(&[usize])) {
    fn go(rows: usize, cols: usize, used: &mut Vec<bool>, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if pick.len() == cols {
            f(pick);
            return;
        }
        for i in 0..rows {
            if !used[i] {
                used[i] = true;
                pick.push(i);
                go(rows, cols, used, pick, f);
                pick.pop();
                used[i] = false;
            }
        }
    }
    go(rows, cols, &mut vec![false; rows], &mut Vec::new(), f);
}

fn random_costs(rng: &mut ChaCha8Rng) -> CostMatrix {
    let cols = rng.random_range(1..=4);
    let rows = rng.random_range(cols..=6);
    let data = (0..rows * cols).map(|_| rng.random_range(0.0..10.0)).collect();
    CostMatrix::new(rows, cols, data).expect("valid shape")
}

/// Minimum over injections of the summed (pursuer-ordered) and largest cost.
fn brute_force(c: &CostMatrix) -> (f64, f64) {
    let (mut total, mut bottleneck) = (f64::INFINITY, f64::INFINITY);
    for_each_injection(c.rows(), c.cols(), &mut |pick| {
        let mut pairs: Vec<(usize, usize)> = pick.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        pairs.sort_unstable();
        total = total.min(pairs.iter().map(|&(i, j)| c.get(i, j)).sum());
        bottleneck = bottleneck.min(pairs.iter().map(|&(i, j)| c.get(i, j)).fold(0.0, f64::max));
    });
    (total, bottleneck)
}

fn hungarian_total(rng: &mut ChaCha8Rng, fault: bool) -> Result<(), String> {
    let c = random_costs(rng);
    let a = hungarian_min_total(&c).map_err(|e| e.to_string())?;
    let got = c.total(&a) + if fault { 1.0 } else { 0.0 };
    let (best, _) = brute_force(&c);
    if a.len() != c.cols() || got != best {
        return Err(format!("total {got} vs brute force {best}"));
    }
    Ok(())
}

fn hungarian_bottleneck(rng: &mut ChaCha8Rng, _: bool) -> Result<(), String> {
    let c = random_costs(rng);
    let a = hungarian_min_max(&c).map_err(|e| e.to_string())?;
    let (_, best) = brute_force(&c);
    if a.len() != c.cols() || c.bottleneck(&a) != best {
        return Err(format!("bottleneck {} vs brute force {best}", c.bottleneck(&a)));
    }
    Ok(())
}

fn random_map(rng: &mut ChaCha8Rng, side: usize, density: f64) -> GridMap {
    let blocked = (0..side * side).map(|_| rng.random_bool(density)).collect();
    GridMap::new(side, side, blocked).expect("positive size")
}

fn random_free(rng: &mut ChaCha8Rng, map: &GridMap) -> Option<VertexId> {
    let free: Vec<VertexId> = map.free_vertices().collect();
    (!free.is_empty()).then(|| free[rng.random_range(0..free.len())])
}

fn check_columns(map: &GridMap, k: &TransitionKernel, what: &str) -> Result<(), String> {
    for origin in map.free_vertices() {
        let col = k.column(origin);
        let sum: f64 = col.iter().map(|c| c.1).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("{what} column {} sums to {sum}", origin.0));
        }
        let nbrs = map.neighbors8(origin);
        if let Some((y, _)) = col.iter().find(|(y, _)| *y != origin && !nbrs.contains(y)) {
            return Err(format!("{what} column {} reaches {}", origin.0, y.0));
        }
    }
    Ok(())
}

fn kernel_normalization(rng: &mut ChaCha8Rng, _: bool) -> Result<(), String> {
    let map = random_map(rng, 12, 0.2);
    let (Some(r), Some(y)) = (random_free(rng, &map), random_free(rng, &map)) else {
        return Ok(());
    };
    let pursuer = PursuerProfile {
        id: 0,
        v_max: rng.random_range(1.2..2.0),
        capture_radius: rng.random_range(1.0..2.0),
    };
    let evader = EvaderProfile {
        sigma: rng.random_range(0.1..2.0),
        ..EvaderProfile::new(0)
    };
    let from_r = theta_star(&map, r).map_err(|e| e.to_string())?;
    let k = build_evader_kernel(
        &[Threat {
            profile: &pursuer,
            field: &from_r,
        }],
        &evader,
        &map,
    );
    check_columns(&map, &k, "evader kernel")?;
    let from_y = theta_star(&map, y).map_err(|e| e.to_string())?;
    let l = build_pursuer_kernel_with_field(&from_y, &pursuer, &map, 0.3);
    check_columns(&map, &l, "pursuer kernel")
}

fn theta_star_bounds(rng: &mut ChaCha8Rng, _: bool) -> Result<(), String> {
    let map = random_map(rng, 16, 0.2);
    let Some(s) = random_free(rng, &map) else { return Ok(()) };
    let field = theta_star(&map, s).map_err(|e| e.to_string())?;
    let octile = octile_dijkstra(&map, s);
    for v in map.free_vertices() {
        let (g, d) = (field.g(v), octile[v.index()]);
        if g.is_infinite() != d.is_infinite() {
            return Err(format!("vertex {} reachability differs", v.0));
        }
        if g.is_finite() && (g < map.euclidean(s, v) - 1e-9 || g > d + 1e-9) {
            return Err(format!("vertex {}: g {g} outside [{}, {d}]", v.0, map.euclidean(s, v)));
        }
    }
    Ok(())
}

pub fn run_suite(seed: u64, cases: usize, inject_fault: bool) -> Report {
    let checks: [(&str, Check); 4] = [
        ("hungarian_min_total matches brute force", hungarian_total),
        ("hungarian_min_max matches brute force", hungarian_bottleneck),
        ("kernel columns are normalized", kernel_normalization),
        ("theta* lies between euclidean and octile", theta_star_bounds),
    ];
    let mut lines = Vec::new();
    let mut failures = 0;
    for (p, (name, check)) in checks.iter().enumerate() {
        let failed = (0..cases).find_map(|case| {
            let mut rng = rng_for(seed, p as u64, case);
            check(&mut rng, inject_fault && case == 0).err().map(|e| (case, e))
        });
        match failed {
            None => lines.push(format!("pass  {name} ({cases} cases)")),
            Some((case, err)) => {
                failures += 1;
                lines.push(format!("FAIL  {name}: seed {seed} case {case}: {err}"));
            }
        }
    }
    Report { lines, failures }
}
