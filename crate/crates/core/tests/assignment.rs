use proptest::prelude::*;
use pursuit_core::assignment::{
    assign_from_samples, hungarian_min_max, hungarian_min_total, mtrra, nna, ttrra, ttrra_rounds, Assignment,
    CostMatrix, Mode, TravelTimeSamples,
};

fn injections(rows: usize, cols: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn go(rows: usize, cols: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pick.len() == cols {
            out.push(pick.clone());
            return;
        }
        for i in 0..rows {
            if !pick.contains(&i) {
                pick.push(i);
                go(rows, cols, pick, out);
                pick.pop();
            }
        }
    }
    go(rows, cols, &mut pick, &mut out);
    out
}

fn brute_total(c: &CostMatrix) -> f64 {
    injections(c.rows(), c.cols())
        .iter()
        .map(|p| p.iter().enumerate().map(|(j, &i)| c.get(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn brute_bottleneck(c: &CostMatrix) -> f64 {
    injections(c.rows(), c.cols())
        .iter()
        .map(|p| p.iter().enumerate().map(|(j, &i)| c.get(i, j)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn cost_matrix() -> impl Strategy<Value = CostMatrix> {
    (1usize..=4)
        .prop_flat_map(|cols| (cols..=6usize, Just(cols)))
        .prop_flat_map(|(rows, cols)| {
            prop::collection::vec(0.0f64..10.0, rows * cols)
                .prop_map(move |data| CostMatrix::new(rows, cols, data).unwrap())
        })
}

/// Sum over evaders of the smallest time among the pursuers given to it.
fn deterministic_total(c: &CostMatrix, a: &Assignment) -> f64 {
    (0..c.cols())
        .map(|j| {
            a.pursuers_of(j)
                .iter()
                .map(|&i| c.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn free_pursuers(c: &CostMatrix, a0: &Assignment) -> Vec<usize> {
    (0..c.rows()).filter(|&i| a0.evader_of(i).is_none()).collect()
}

/// Every way of giving each free pursuer one evader.
fn completions(c: &CostMatrix, a0: &Assignment) -> Vec<Assignment> {
    let free = free_pursuers(c, a0);
    let n = c.cols().pow(free.len() as u32);
    (0..n)
        .map(|mut code| {
            let mut pairs = Vec::new();
            for &i in &free {
                pairs.push((i, code % c.cols()));
                code /= c.cols();
            }
            Assignment::new(pairs).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hungarian_total_is_optimal(c in cost_matrix()) {
        let a = hungarian_min_total(&c).unwrap();
        prop_assert_eq!(a.len(), c.cols());
        prop_assert!((c.total(&a) - brute_total(&c)).abs() <= 1e-9);
    }

    #[test]
    fn hungarian_bottleneck_is_optimal(c in cost_matrix()) {
        let a = hungarian_min_max(&c).unwrap();
        prop_assert_eq!(a.len(), c.cols());
        prop_assert_eq!(c.bottleneck(&a), brute_bottleneck(&c));
    }

    #[test]
    fn bottleneck_never_exceeds_min_total_solution(c in cost_matrix()) {
        let by_total = hungarian_min_total(&c).unwrap();
        let by_max = hungarian_min_max(&c).unwrap();
        prop_assert!(c.bottleneck(&by_max) <= c.bottleneck(&by_total));
    }

    #[test]
    fn every_mode_assigns_every_pursuer_once(c in cost_matrix()) {
        let s = TravelTimeSamples::from_matrix(&c);
        for mode in Mode::ALL {
            let a = assign_from_samples(&s, mode).unwrap();
            prop_assert_eq!(a.len(), c.rows());
            for i in 0..c.rows() {
                prop_assert!(a.evader_of(i).is_some());
            }
            for j in 0..c.cols() {
                prop_assert!(!a.pursuers_of(j).is_empty());
            }
        }
    }

    #[test]
    fn nna_first_pick_is_global_minimum(c in cost_matrix()) {
        let a = nna(&c).unwrap();
        let (mut bi, mut bj) = (0, 0);
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                if c.get(i, j) < c.get(bi, bj) {
                    (bi, bj) = (i, j);
                }
            }
        }
        prop_assert_eq!(a.evader_of(bi), Some(bj));
    }

    #[test]
    fn greedy_gains_are_nonincreasing(c in cost_matrix()) {
        let a0 = hungarian_min_total(&c).unwrap();
        let rounds = ttrra_rounds(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap();
        for w in rounds.windows(2) {
            prop_assert!(w[1].gain() <= w[0].gain() + 1e-9, "{:?}", w);
        }
    }

    #[test]
    fn greedy_bound_and_worst_case(c in cost_matrix()) {
        let s = TravelTimeSamples::from_matrix(&c);
        let a0 = hungarian_min_total(&c).unwrap();
        let greedy = deterministic_total(&c, &a0.union(&ttrra(&a0, &s).unwrap()).unwrap());
        let base = deterministic_total(&c, &a0);
        let all: Vec<f64> = completions(&c, &a0)
            .iter()
            .map(|extra| deterministic_total(&c, &a0.union(extra).unwrap()))
            .collect();
        let best = all.iter().copied().fold(f64::INFINITY, f64::min);
        let worst = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Greedy over a partition matroid keeps at least half the best reduction.
        prop_assert!(base - greedy >= 0.5 * (base - best) - 1e-9);
        prop_assert!(greedy <= worst + 1e-9);
        prop_assert!(greedy <= base + 1e-9);
    }

    #[test]
    fn redundant_pursuers_never_slow_the_team(c in cost_matrix(), h in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tau: Vec<f64> = (0..h * c.rows() * c.cols()).map(|_| rng.random_range(0.0..10.0)).collect();
        let s = TravelTimeSamples::new(h, c.rows(), c.cols(), tau).unwrap();
        let costs = s.mean_costs();
        let a0 = hungarian_min_max(&costs).unwrap();
        let extra = mtrra(&a0, &s).unwrap();
        prop_assert_eq!(extra.len(), c.rows() - c.cols());
        for &(i, _) in extra.pairs() {
            prop_assert!(a0.evader_of(i).is_none());
        }
    }
}

#[test]
fn total_and_bottleneck_can_disagree() {
    let c = CostMatrix::from_rows(&[vec![1.0, 4.0], vec![3.0, 5.0]]).unwrap();
    assert_eq!(c.total(&hungarian_min_total(&c).unwrap()), 6.0);
    let a = hungarian_min_max(&c).unwrap();
    assert_eq!(c.bottleneck(&a), 4.0);
    assert_eq!(a.pairs(), &[(0, 1), (1, 0)]);
}
