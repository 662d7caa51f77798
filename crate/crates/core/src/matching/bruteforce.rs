use super::{CostMatrix, MatchingResult, SolverKind};
use crate::error::{Error, Result};

/// Largest size accepted by [`solve_bruteforce`] (9! = 362880 permutations).
pub const BRUTEFORCE_MAX: usize = 9;

/// Minimum over all of `S_n` by enumeration (Heap's algorithm).
pub fn solve_bruteforce(cost: &CostMatrix) -> Result<MatchingResult> {
    let n = cost.n();
    if n > BRUTEFORCE_MAX {
        return Err(Error::TooLarge { n, max: BRUTEFORCE_MAX });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost.cost_of(&perm);
    let mut best_perm = perm.clone();
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let total = cost.cost_of(&perm);
            if total < best {
                best = total;
                best_perm.copy_from_slice(&perm);
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(MatchingResult::new(best_perm, best, SolverKind::Bruteforce))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton() {
        let r = solve_bruteforce(&CostMatrix::from_rows(&[vec![0.0]]).unwrap()).unwrap();
        assert_eq!(r.permutation, vec![0]);
        assert_eq!(r.total_cost, 0.0);
        assert!(r.certified_optimal);
    }

    #[test]
    fn two_by_two_prefers_identity() {
        // identity 1 + 0 = 1, swap 2 + 3 = 5
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let r = solve_bruteforce(&c).unwrap();
        assert_eq!(r.permutation, vec![0, 1]);
        assert_eq!(r.total_cost, 1.0);
        assert_eq!(r.gap_bound, 0.0);
    }

    #[test]
    fn zero_matrix() {
        let r = solve_bruteforce(&CostMatrix::zeros(5)).unwrap();
        assert_eq!(r.total_cost, 0.0);
        r.verify(&CostMatrix::zeros(5)).unwrap();
    }

    #[test]
    fn visits_every_permutation() {
        // the unique zero-cost permutation sits far from the identity
        let n = 7;
        let target = [6, 4, 2, 0, 5, 3, 1];
        let mut rows = vec![vec![1.0; n]; n];
        for (i, &j) in target.iter().enumerate() {
            rows[i][j] = 0.0;
        }
        let r = solve_bruteforce(&CostMatrix::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(r.permutation, target);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn rejects_large_inputs() {
        assert!(matches!(solve_bruteforce(&CostMatrix::zeros(10)), Err(Error::TooLarge { n: 10, .. })));
    }
}
