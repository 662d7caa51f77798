//! One-dimensional matchings: rank pairing on the line, cyclic rank pairing
//! on the circle.

use super::{MatchingResult, SolverKind};
use crate::error::{Error, Result};

/// Arc distance on `R/Z` for coordinates in `[0, 1)`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_unstable_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    idx
}

fn check_lengths(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    Ok(())
}

/// Optimal matching for `|x - y|` on the line: pair the `k`-th smallest of
/// each sample. `O(n log n)`.
pub fn solve_sorted_line(xs: &[f64], ys: &[f64]) -> Result<MatchingResult> {
    check_lengths(xs, ys)?;
    let ix = argsort(xs);
    let iy = argsort(ys);
    let mut perm = vec![0usize; xs.len()];
    let mut total = 0.0;
    for (&i, &j) in ix.iter().zip(&iy) {
        perm[i] = j;
        total += (xs[i] - ys[j]).abs();
    }
    Ok(MatchingResult::new(perm, total, SolverKind::Sorted))
}

fn reduce(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let r = x.rem_euclid(1.0);
            if r >= 1.0 {
                0.0
            } else {
                r
            }
        })
        .collect()
}

/// Total cost of pairing the `k`-th smallest x with the `(k + t) mod n`-th
/// smallest y.
fn offset_cost(sx: &[f64], sy: &[f64], t: usize) -> f64 {
    let (head, tail) = sy.split_at(t);
    let wrapped = tail.iter().chain(head);
    sx.iter().zip(wrapped).map(|(&a, &b)| circle_distance(a, b)).sum()
}

/// Lower bound `n * min_a int_0^1 |F(s) - G(s) - a| ds` on the circular
/// matching cost, and an integer minimiser `a * n`.
fn cdf_bound(sx: &[f64], sy: &[f64]) -> (f64, i64) {
    let n = sx.len();
    // (D, length) runs of the counting difference #x<=s - #y<=s
    let mut runs: Vec<(i64, f64)> = Vec::with_capacity(2 * n + 1);
    let (mut i, mut j) = (0usize, 0usize);
    let mut level = 0i64;
    let mut pos = 0.0f64;
    while i < n || j < n {
        let next = match (sx.get(i), sy.get(j)) {
            (Some(&a), Some(&b)) if a <= b => {
                i += 1;
                (a, 1)
            }
            (Some(&a), None) => {
                i += 1;
                (a, 1)
            }
            (_, Some(&b)) => {
                j += 1;
                (b, -1)
            }
            (None, None) => unreachable!(),
        };
        runs.push((level, next.0 - pos));
        pos = next.0;
        level += next.1;
    }
    runs.push((level, 1.0 - pos));

    let mut by_level = runs.clone();
    by_level.sort_unstable_by_key(|a| a.0);
    let total_len: f64 = by_level.iter().map(|r| r.1).sum();
    let mut acc = 0.0;
    let mut median = by_level[0].0;
    for &(d, len) in &by_level {
        acc += len;
        median = d;
        if acc >= total_len / 2.0 {
            break;
        }
    }
    let bound = runs.iter().map(|&(d, len)| len * (d - median).abs() as f64).sum();
    (bound, median)
}

/// Optimal matching for the arc distance on the circle.
///
/// The optimum pairs sorted samples with a cyclic offset. The offset is
/// located from the median of the counting-function difference, which also
/// yields a matching lower bound; when the two disagree beyond rounding the
/// solver falls back to scanning all `n` offsets.
pub fn solve_cyclic_circle(xs: &[f64], ys: &[f64]) -> Result<MatchingResult> {
    check_lengths(xs, ys)?;
    let rx = reduce(xs);
    let ry = reduce(ys);
    let ix = argsort(&rx);
    let iy = argsort(&ry);
    let sx: Vec<f64> = ix.iter().map(|&i| rx[i]).collect();
    let sy: Vec<f64> = iy.iter().map(|&j| ry[j]).collect();
    let n = sx.len() as i64;

    let (bound, m) = cdf_bound(&sx, &sy);
    let mut best: Option<(f64, usize)> = None;
    for base in [-m, m] {
        for delta in -1..=1 {
            let t = (base + delta).rem_euclid(n) as usize;
            let c = offset_cost(&sx, &sy, t);
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, t));
            }
        }
    }
    let (cost, mut offset) = best.expect("n >= 1");
    if cost > bound + 1e-9 * (1.0 + bound) {
        offset = scan_offsets(&sx, &sy).1;
    }
    Ok(assemble(&ix, &iy, offset, &rx, &ry))
}

/// Reference version of [`solve_cyclic_circle`] that evaluates every offset,
/// `O(n^2)`.
pub fn solve_cyclic_circle_scan(xs: &[f64], ys: &[f64]) -> Result<MatchingResult> {
    check_lengths(xs, ys)?;
    let rx = reduce(xs);
    let ry = reduce(ys);
    let ix = argsort(&rx);
    let iy = argsort(&ry);
    let sx: Vec<f64> = ix.iter().map(|&i| rx[i]).collect();
    let sy: Vec<f64> = iy.iter().map(|&j| ry[j]).collect();
    let offset = scan_offsets(&sx, &sy).1;
    Ok(assemble(&ix, &iy, offset, &rx, &ry))
}

fn scan_offsets(sx: &[f64], sy: &[f64]) -> (f64, usize) {
    (0..sx.len())
        .map(|t| (offset_cost(sx, sy, t), t))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

fn assemble(ix: &[usize], iy: &[usize], offset: usize, rx: &[f64], ry: &[f64]) -> MatchingResult {
    let n = ix.len();
    let mut perm = vec![0usize; n];
    let mut total = 0.0;
    for k in 0..n {
        let i = ix[k];
        let j = iy[(k + offset) % n];
        perm[i] = j;
        total += circle_distance(rx[i], ry[j]);
    }
    MatchingResult::new(perm, total, SolverKind::Cyclic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_pairs_by_rank() {
        let r = solve_sorted_line(&[0.1, 0.5], &[0.6, 0.2]).unwrap();
        assert_eq!(r.permutation, vec![1, 0]);
        assert!((r.total_cost - 0.2).abs() < 1e-15);
        let r = solve_sorted_line(&[0.3, 0.9, 0.1], &[0.1, 0.3, 0.9]).unwrap();
        assert_eq!(r.total_cost, 0.0);
        let r = solve_sorted_line(&[0.0], &[1.0]).unwrap();
        assert_eq!(r.total_cost, 1.0);
        assert!(matches!(solve_sorted_line(&[0.0], &[]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn cyclic_small_cases() {
        let r = solve_cyclic_circle(&[0.0], &[0.5]).unwrap();
        assert_eq!(r.total_cost, 0.5);
        let r = solve_cyclic_circle(&[0.0, 0.5], &[0.25, 0.75]).unwrap();
        assert!((r.total_cost - 0.5).abs() < 1e-15);
        let xs = [0.9, 0.05, 0.4, 0.61];
        let r = solve_cyclic_circle(&xs, &xs).unwrap();
        assert_eq!(r.total_cost, 0.0);
        assert!(matches!(solve_cyclic_circle(&[0.1, 0.2], &[0.3]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn wrap_around_beats_rank_pairing() {
        // rank pairing would cost 0.1 + 0.1 + 0.8; the wrap costs 0.1 * 3
        let xs = [0.05, 0.35, 0.95];
        let ys = [0.15, 0.45, 0.05];
        let fast = solve_cyclic_circle(&xs, &ys).unwrap();
        let scan = solve_cyclic_circle_scan(&xs, &ys).unwrap();
        assert!((fast.total_cost - scan.total_cost).abs() < 1e-15);
        assert!(fast.total_cost < 0.3 + 1e-12);
    }

    #[test]
    fn fast_path_matches_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 3, 5, 17, 64, 200] {
            for _ in 0..20 {
                let xs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
                // clustered ys force large offsets
                let c: f64 = rng.gen();
                let ys: Vec<f64> = (0..n).map(|_| (c + 0.3 * rng.gen::<f64>()) % 1.0).collect();
                let fast = solve_cyclic_circle(&xs, &ys).unwrap();
                let scan = solve_cyclic_circle_scan(&xs, &ys).unwrap();
                assert!((fast.total_cost - scan.total_cost).abs() <= 1e-10, "n={n}");
            }
        }
    }
}
