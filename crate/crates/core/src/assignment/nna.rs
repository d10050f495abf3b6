//! Nearest-neighbor baseline: repeatedly take the globally cheapest pair.

use super::{Assignment, AssignmentError, CostMatrix};

/// Picks the smallest remaining entry, removes its row and column, and once
/// every evader has a pursuer starts over with the remaining pursuers and all
/// evaders. Ties go to the lowest (pursuer, evader) pair.
pub fn nna(c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    c.check_shape()?;
    let mut pursuer_free = vec![true; c.rows()];
    let mut pairs = Vec::with_capacity(c.rows());
    while pairs.len() < c.rows() {
        let mut evader_free = vec![true; c.cols()];
        for _ in 0..c.cols() {
            let mut best: Option<(f64, usize, usize)> = None;
            for i in (0..c.rows()).filter(|&i| pursuer_free[i]) {
                for j in (0..c.cols()).filter(|&j| evader_free[j]) {
                    let v = c.get(i, j);
                    if best.is_none_or(|(b, _, _)| v < b) {
                        best = Some((v, i, j));
                    }
                }
            }
            let Some((_, i, j)) = best else { break };
            pursuer_free[i] = false;
            evader_free[j] = false;
            pairs.push((i, j));
        }
    }
    Assignment::new(pairs)
}
