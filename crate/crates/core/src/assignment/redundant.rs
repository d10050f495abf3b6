//! Greedy assignment of the pursuers left over after the one-to-one match.

use super::{Assignment, AssignmentError, TravelTimeSamples};

/// Marginal gains closer than this are treated as equal.
const TIE_TOLERANCE: f64 = 1e-9;

/// One greedy insertion: the chosen pair and the evader's expected capture
/// time before and after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyRound {
    pub pursuer: usize,
    pub evader: usize,
    pub t_curr: f64,
    pub t_new: f64,
}

impl GreedyRound {
    pub fn gain(&self) -> f64 {
        self.t_curr - self.t_new
    }
}

#[derive(Clone, Copy)]
enum Objective {
    Total,
    Max,
}

#[derive(Clone, Copy)]
struct Candidate {
    pursuer: usize,
    evader: usize,
    t_curr: f64,
    t_new: f64,
}

impl Objective {
    /// Compares a candidate against the incumbent `(t_curr*, t_new*)`.
    fn compare(self, c: &Candidate, star_curr: f64, star_new: f64) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let (lhs, rhs) = match self {
            Objective::Total => (c.t_curr - c.t_new, star_curr - star_new),
            Objective::Max => (c.t_curr.max(star_new), star_curr.max(c.t_new)),
        };
        if lhs > rhs + TIE_TOLERANCE {
            Greater
        } else if (lhs - rhs).abs() <= TIE_TOLERANCE || lhs == rhs {
            Equal
        } else {
            Less
        }
    }

    /// Picks from the candidates that tied for the best comparison.
    fn break_tie(self, mut tied: Vec<Candidate>) -> Candidate {
        match self {
            Objective::Total => {
                // Lower median of T_new; stable sort keeps loop order among equals.
                tied.sort_by(|a, b| a.t_new.total_cmp(&b.t_new));
                tied[(tied.len() - 1) / 2]
            }
            Objective::Max => {
                let mut best = tied[0];
                for c in &tied[1..] {
                    if c.t_new > best.t_new {
                        best = *c;
                    }
                }
                best
            }
        }
    }
}

fn check_initial(a0: &Assignment, samples: &TravelTimeSamples) -> Result<Vec<usize>, AssignmentError> {
    let mut owner = vec![usize::MAX; samples.evaders()];
    for &(i, j) in a0.pairs() {
        if i >= samples.pursuers() || j >= samples.evaders() {
            return Err(AssignmentError::OutOfRange(i, j));
        }
        if owner[j] != usize::MAX {
            return Err(AssignmentError::BadInitialAssignment);
        }
        owner[j] = i;
    }
    if owner.contains(&usize::MAX) {
        return Err(AssignmentError::BadInitialAssignment);
    }
    Ok(owner)
}

fn greedy(
    a0: &Assignment,
    samples: &TravelTimeSamples,
    objective: Objective,
) -> Result<Vec<GreedyRound>, AssignmentError> {
    let owner = check_initial(a0, samples)?;
    let (h, n_p, n_e) = (samples.h(), samples.pursuers(), samples.evaders());
    // S[j][z]: best sampled time to evader j among the pursuers given to it.
    let mut s: Vec<Vec<f64>> = (0..n_e)
        .map(|j| (0..h).map(|z| samples.get(z, owner[j], j)).collect())
        .collect();
    let mut free: Vec<usize> = (0..n_p).filter(|&i| a0.evader_of(i).is_none()).collect();
    let mut rounds = Vec::with_capacity(free.len());

    while !free.is_empty() {
        let mut star_curr = f64::NEG_INFINITY;
        let mut star_new = f64::INFINITY;
        let mut tied: Vec<Candidate> = Vec::new();
        for &i in &free {
            for j in 0..n_e {
                let t_curr = s[j].iter().sum::<f64>() / h as f64;
                let t_new = (0..h).map(|z| s[j][z].min(samples.get(z, i, j))).sum::<f64>() / h as f64;
                let c = Candidate {
                    pursuer: i,
                    evader: j,
                    t_curr,
                    t_new,
                };
                match objective.compare(&c, star_curr, star_new) {
                    std::cmp::Ordering::Greater => {
                        star_curr = t_curr;
                        star_new = t_new;
                        tied.clear();
                        tied.push(c);
                    }
                    std::cmp::Ordering::Equal => tied.push(c),
                    std::cmp::Ordering::Less => {}
                }
            }
        }
        let pick = objective.break_tie(tied);
        for (z, sz) in s[pick.evader].iter_mut().enumerate() {
            *sz = sz.min(samples.get(z, pick.pursuer, pick.evader));
        }
        free.retain(|&i| i != pick.pursuer);
        rounds.push(GreedyRound {
            pursuer: pick.pursuer,
            evader: pick.evader,
            t_curr: pick.t_curr,
            t_new: pick.t_new,
        });
    }
    Ok(rounds)
}

fn to_assignment(rounds: &[GreedyRound]) -> Result<Assignment, AssignmentError> {
    Assignment::new(rounds.iter().map(|r| (r.pursuer, r.evader)).collect())
}

/// Greedy rounds of the total-time redundant assignment, in selection order.
pub fn ttrra_rounds(a0: &Assignment, samples: &TravelTimeSamples) -> Result<Vec<GreedyRound>, AssignmentError> {
    greedy(a0, samples, Objective::Total)
}

/// Greedy rounds of the max-time redundant assignment, in selection order.
pub fn mtrra_rounds(a0: &Assignment, samples: &TravelTimeSamples) -> Result<Vec<GreedyRound>, AssignmentError> {
    greedy(a0, samples, Objective::Max)
}

/// Assignment of the pursuers outside `a0` that greedily minimizes the sum
/// of expected capture times.
pub fn ttrra(a0: &Assignment, samples: &TravelTimeSamples) -> Result<Assignment, AssignmentError> {
    to_assignment(&ttrra_rounds(a0, samples)?)
}

/// As [`ttrra`] for the largest expected capture time.
pub fn mtrra(a0: &Assignment, samples: &TravelTimeSamples) -> Result<Assignment, AssignmentError> {
    to_assignment(&mtrra_rounds(a0, samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::CostMatrix;

    fn samples(h: usize, n_p: usize, n_e: usize, tau: &[f64]) -> TravelTimeSamples {
        TravelTimeSamples::new(h, n_p, n_e, tau.to_vec()).unwrap()
    }

    #[test]
    fn largest_gain_wins() {
        // Pursuers 0 and 1 hold evaders 0 and 1 at mean times 5 and 4.
        // Pursuer 2 would bring them to 3 and 3.5.
        let tau = [
            5.0, 9.0, 9.0, 4.0, 3.0, 3.5, // z = 0
            5.0, 9.0, 9.0, 4.0, 3.0, 3.5, // z = 1
        ];
        let s = samples(2, 3, 2, &tau);
        let a0 = Assignment::new(vec![(0, 0), (1, 1)]).unwrap();
        let rounds = ttrra_rounds(&a0, &s).unwrap();
        assert_eq!(rounds.len(), 1);
        assert_eq!((rounds[0].pursuer, rounds[0].evader), (2, 0));
        assert!((rounds[0].gain() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn min_over_samples_is_taken_per_sample() {
        // Incumbent 4 / 2, newcomer 1 / 6: per-sample min gives (1 + 2) / 2.
        let s = samples(2, 2, 1, &[4.0, 1.0, 2.0, 6.0]);
        let a0 = Assignment::new(vec![(0, 0)]).unwrap();
        let r = ttrra_rounds(&a0, &s).unwrap()[0];
        assert_eq!(r.t_curr, 3.0);
        assert_eq!(r.t_new, 1.5);
    }

    #[test]
    fn zero_gain_ties_take_lower_median() {
        // Pursuer 3 is slower than every incumbent; evader times 2, 6, 4.
        let c = CostMatrix::from_rows(&[
            vec![2.0, 50.0, 50.0],
            vec![50.0, 6.0, 50.0],
            vec![50.0, 50.0, 4.0],
            vec![90.0, 90.0, 90.0],
        ])
        .unwrap();
        let s = TravelTimeSamples::from_matrix(&c);
        let a0 = Assignment::new(vec![(0, 0), (1, 1), (2, 2)]).unwrap();
        let r = ttrra_rounds(&a0, &s).unwrap();
        assert_eq!(r[0].gain(), 0.0);
        // T_new values 2, 6, 4; the median is 4 (evader 2).
        assert_eq!(r[0].evader, 2);

        // Two tied entries: lower median is the smaller T_new.
        let c = CostMatrix::from_rows(&[vec![2.0, 50.0], vec![50.0, 6.0], vec![90.0, 90.0]]).unwrap();
        let a0 = Assignment::new(vec![(0, 0), (1, 1)]).unwrap();
        let r = ttrra_rounds(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap();
        assert_eq!(r[0].evader, 0);
    }

    #[test]
    fn max_objective_helps_the_slowest_evader() {
        let c = CostMatrix::from_rows(&[vec![9.0, 50.0], vec![50.0, 4.0], vec![3.0, 3.0]]).unwrap();
        let s = TravelTimeSamples::from_matrix(&c);
        let a0 = Assignment::new(vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(mtrra(&a0, &s).unwrap().pairs(), &[(2, 0)]);
        // Same result with the evaders listed the other way round.
        let c = CostMatrix::from_rows(&[vec![50.0, 9.0], vec![4.0, 50.0], vec![3.0, 3.0]]).unwrap();
        let a0 = Assignment::new(vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(
            mtrra(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap().pairs(),
            &[(2, 1)]
        );
    }

    #[test]
    fn max_objective_ties_take_largest_new_time() {
        // Both evaders already at 5; pursuer 2 cannot help either, so every
        // candidate ties and the one with the larger T_new is taken.
        let c = CostMatrix::from_rows(&[vec![5.0, 50.0], vec![50.0, 5.0], vec![60.0, 60.0]]).unwrap();
        let a0 = Assignment::new(vec![(0, 0), (1, 1)]).unwrap();
        let r = mtrra_rounds(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap();
        assert_eq!((r[0].pursuer, r[0].evader), (2, 0));

        let c = CostMatrix::from_rows(&[vec![5.0], vec![4.0], vec![1.0]]).unwrap();
        let a0 = Assignment::new(vec![(0, 0)]).unwrap();
        let r = mtrra(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap();
        assert_eq!(r.pursuers_of(0), vec![1, 2]);
    }

    #[test]
    fn no_redundant_pursuers() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let a0 = Assignment::new(vec![(0, 0), (1, 1)]).unwrap();
        assert!(ttrra(&a0, &TravelTimeSamples::from_matrix(&c)).unwrap().is_empty());
    }

    #[test]
    fn initial_assignment_is_checked() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = TravelTimeSamples::from_matrix(&c);
        let partial = Assignment::new(vec![(0, 0)]).unwrap();
        assert_eq!(ttrra(&partial, &s), Err(AssignmentError::BadInitialAssignment));
        let doubled = Assignment::new(vec![(0, 0), (1, 0)]).unwrap();
        assert_eq!(ttrra(&doubled, &s), Err(AssignmentError::BadInitialAssignment));
    }
}
