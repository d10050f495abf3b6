//! Munkres' method over two cost algebras: ordinary addition (minimum total
//! cost) and the max/"difference" pair of the bottleneck objective.

use super::{Assignment, AssignmentError, CostMatrix};

/// `a ⊕∞ b = max(a, b)`.
pub fn oplus_inf(a: f64, b: f64) -> f64 {
    a.max(b)
}

/// `a ⊖∞ b`: `a` if `a > b`, 0 if equal. Reductions only ever subtract a
/// minimum, so `a < b` is a logic error.
pub fn ominus_inf(a: f64, b: f64) -> f64 {
    assert!(a >= b, "bottleneck reduction of {a} by larger {b}");
    if a > b {
        a
    } else {
        0.0
    }
}

trait Algebra {
    fn oplus(&self, a: f64, b: f64) -> f64;
    fn ominus(&self, a: f64, b: f64) -> f64;
    fn is_zero(&self, a: f64) -> bool;
}

struct Additive {
    tol: f64,
}

impl Algebra for Additive {
    fn oplus(&self, a: f64, b: f64) -> f64 {
        a + b
    }

    fn ominus(&self, a: f64, b: f64) -> f64 {
        (a - b).max(0.0)
    }

    fn is_zero(&self, a: f64) -> bool {
        a <= self.tol
    }
}

struct Bottleneck;

impl Algebra for Bottleneck {
    fn oplus(&self, a: f64, b: f64) -> f64 {
        oplus_inf(a, b)
    }

    fn ominus(&self, a: f64, b: f64) -> f64 {
        ominus_inf(a, b)
    }

    fn is_zero(&self, a: f64) -> bool {
        a == 0.0
    }
}

/// Square working copy: pursuers are rows, evaders plus zero-cost dummy
/// columns are columns. Infinite entries become a large finite stand-in.
fn padded(c: &CostMatrix) -> Vec<Vec<f64>> {
    let finite_max = (0..c.rows())
        .flat_map(|i| (0..c.cols()).map(move |j| (i, j)))
        .map(|(i, j)| c.get(i, j))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let stand_in = 1e6 * (1.0 + finite_max);
    let n = c.rows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j >= c.cols() {
                        0.0
                    } else if c.get(i, j).is_finite() {
                        c.get(i, j)
                    } else {
                        stand_in
                    }
                })
                .collect()
        })
        .collect()
}

/// Returns the matched column of every row.
fn munkres<A: Algebra>(alg: &A, mut c: Vec<Vec<f64>>) -> Vec<usize> {
    let n = c.len();
    for row in c.iter_mut() {
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        for x in row.iter_mut() {
            *x = alg.ominus(*x, m);
        }
    }
    for j in 0..n {
        let m = (0..n).map(|i| c[i][j]).fold(f64::INFINITY, f64::min);
        for row in c.iter_mut() {
            row[j] = alg.ominus(row[j], m);
        }
    }

    const NONE: usize = usize::MAX;
    let mut star_in_row = vec![NONE; n];
    let mut star_in_col = vec![NONE; n];
    let mut prime_in_row = vec![NONE; n];
    for i in 0..n {
        for j in 0..n {
            if alg.is_zero(c[i][j]) && star_in_row[i] == NONE && star_in_col[j] == NONE {
                star_in_row[i] = j;
                star_in_col[j] = i;
            }
        }
    }
    let mut row_cov = vec![false; n];
    let mut col_cov = vec![false; n];

    loop {
        for j in 0..n {
            col_cov[j] = star_in_col[j] != NONE;
        }
        if col_cov.iter().all(|&b| b) {
            break;
        }
        // Prime uncovered zeros until one starts an augmenting path.
        let (pi, pj) = loop {
            let found = (0..n)
                .filter(|&i| !row_cov[i])
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .find(|&(i, j)| !col_cov[j] && alg.is_zero(c[i][j]));
            match found {
                Some((i, j)) => {
                    prime_in_row[i] = j;
                    let s = star_in_row[i];
                    if s == NONE {
                        break (i, j);
                    }
                    row_cov[i] = true;
                    col_cov[s] = false;
                }
                None => {
                    let mut m = f64::INFINITY;
                    for i in (0..n).filter(|&i| !row_cov[i]) {
                        for j in (0..n).filter(|&j| !col_cov[j]) {
                            m = m.min(c[i][j]);
                        }
                    }
                    for i in 0..n {
                        for j in 0..n {
                            match (row_cov[i], col_cov[j]) {
                                (false, false) => c[i][j] = alg.ominus(c[i][j], m),
                                (true, true) => c[i][j] = alg.oplus(c[i][j], m),
                                _ => {}
                            }
                        }
                    }
                }
            }
        };
        // Flip stars and primes along the alternating path.
        let (mut i, mut j) = (pi, pj);
        loop {
            let r = star_in_col[j];
            star_in_row[i] = j;
            star_in_col[j] = i;
            if r == NONE {
                break;
            }
            let next_j = prime_in_row[r];
            star_in_row[r] = NONE;
            i = r;
            j = next_j;
        }
        prime_in_row.fill(NONE);
        row_cov.fill(false);
    }
    star_in_row
}

fn solve<A: Algebra>(alg: &A, c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    c.check_shape()?;
    let matched = munkres(alg, padded(c));
    let pairs = matched.into_iter().enumerate().filter(|&(_, j)| j < c.cols()).collect();
    Assignment::new(pairs)
}

/// One pursuer per evader minimizing the summed cost. Pursuers left over
/// (matched to padding) are not in the result.
pub fn hungarian_min_total(c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let scale = (0..c.rows())
        .flat_map(|i| (0..c.cols()).map(move |j| (i, j)))
        .map(|(i, j)| c.get(i, j))
        .filter(|v| v.is_finite())
        .fold(1.0, f64::max);
    solve(&Additive { tol: 1e-12 * scale }, c)
}

/// One pursuer per evader minimizing the largest matched cost.
pub fn hungarian_min_max(c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    solve(&Bottleneck, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn semiring_operations() {
        assert_eq!(ominus_inf(5.0, 5.0), 0.0);
        assert_eq!(ominus_inf(5.0, 3.0), 5.0);
        assert_eq!(oplus_inf(5.0, 3.0), 5.0);
    }

    #[test]
    #[should_panic]
    fn bottleneck_reduction_by_larger_is_rejected() {
        ominus_inf(3.0, 5.0);
    }

    #[test]
    fn small_totals() {
        let c = m(&[&[1.0, 2.0], &[3.0, 1.0]]);
        let a = hungarian_min_total(&c).unwrap();
        assert_eq!(a.pairs(), &[(0, 0), (1, 1)]);
        assert_eq!(c.total(&a), 2.0);

        let c = m(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        assert_eq!(hungarian_min_total(&c).unwrap().pairs(), &[(0, 0), (1, 1), (2, 2)]);

        // Third row is dominated; the best injection is (0,1), (1,0) at 3.
        let c = m(&[&[4.0, 1.0], &[2.0, 6.0], &[9.0, 9.0]]);
        let a = hungarian_min_total(&c).unwrap();
        assert_eq!(a.pairs(), &[(0, 1), (1, 0)]);
        assert_eq!(a.evader_of(2), None);
    }

    #[test]
    fn small_bottlenecks() {
        let c = m(&[&[1.0, 10.0], &[2.0, 3.0]]);
        let a = hungarian_min_max(&c).unwrap();
        assert_eq!(a.pairs(), &[(0, 0), (1, 1)]);
        assert_eq!(c.bottleneck(&a), 3.0);

        let c = m(&[&[7.0; 3], &[7.0; 3], &[7.0; 3]]);
        let a = hungarian_min_max(&c).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(c.bottleneck(&a), 7.0);
    }

    #[test]
    fn bottleneck_differs_from_total() {
        // Total prefers 1 + 9 = 10 over 6 + 6 = 12; bottleneck prefers 6.
        let c = m(&[&[1.0, 6.0], &[6.0, 9.0]]);
        assert_eq!(hungarian_min_total(&c).unwrap().pairs(), &[(0, 0), (1, 1)]);
        assert_eq!(hungarian_min_max(&c).unwrap().pairs(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn infinite_entries() {
        let inf = f64::INFINITY;
        let c = m(&[&[inf, 2.0], &[1.0, inf]]);
        assert_eq!(hungarian_min_total(&c).unwrap().pairs(), &[(0, 1), (1, 0)]);
        assert_eq!(hungarian_min_max(&c).unwrap().pairs(), &[(0, 1), (1, 0)]);
        let c = m(&[&[inf, 2.0], &[inf, 1.0]]);
        assert_eq!(hungarian_min_total(&c), Err(AssignmentError::EvaderUnreachable(0)));
        let c = m(&[&[1.0, 2.0]]);
        assert!(matches!(
            hungarian_min_max(&c),
            Err(AssignmentError::TooFewPursuers { .. })
        ));
    }
}
