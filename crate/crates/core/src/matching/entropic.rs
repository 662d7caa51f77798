//! Entropic approximation: log-domain Sinkhorn iterations with
//! epsilon-scaling, rounded to a permutation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hungarian::duality_gap;
use super::{CostMatrix, MatchingResult, SolverKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropicOptions {
    /// Final regularisation strength, in cost units.
    pub epsilon: f64,
    /// Budget of Sinkhorn sweeps across all scales.
    pub max_iters: usize,
    /// L1 column-marginal error at which the final scale stops.
    pub tolerance: f64,
}

impl Default for EntropicOptions {
    fn default() -> Self {
        EntropicOptions { epsilon: 1e-2, max_iters: 20_000, tolerance: 1e-3 }
    }
}

/// `ln sum exp((p_k - c_k) / eps)`.
fn log_sum_exp(p: &[f64], c: &[f64], eps: f64) -> f64 {
    let m = p.iter().zip(c).map(|(a, b)| (a - b) / eps).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + p.iter().zip(c).map(|(a, b)| ((a - b) / eps - m).exp()).sum::<f64>().ln()
}

struct Potentials {
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Potentials {
    fn update_rows(&mut self, cost: &CostMatrix, eps: f64, log_mass: f64) {
        let g = &self.g;
        self.f = (0..cost.n())
            .into_par_iter()
            .map(|i| eps * log_mass - eps * log_sum_exp(g, cost.row(i), eps))
            .collect();
    }

    /// Column update, reading columns as rows of the transpose.
    fn update_cols(&mut self, cost_t: &CostMatrix, eps: f64, log_mass: f64) {
        let f = &self.f;
        self.g = (0..cost_t.n())
            .into_par_iter()
            .map(|j| eps * log_mass - eps * log_sum_exp(f, cost_t.row(j), eps))
            .collect();
    }

    /// L1 distance of the plan's column sums from uniform, rows being exact.
    fn column_error(&self, cost_t: &CostMatrix, eps: f64) -> f64 {
        let n = cost_t.n();
        let target = 1.0 / n as f64;
        (0..n)
            .into_par_iter()
            .map(|j| {
                let gj = self.g[j];
                let s: f64 = self.f.iter().zip(cost_t.row(j)).map(|(fi, c)| ((fi + gj - c) / eps).exp()).sum();
                (s - target).abs()
            })
            .sum()
    }
}

/// Approximate assignment via entropic optimal transport.
///
/// The result is never marked optimal; `gap_bound` bounds `mean_cost` minus
/// the optimum using the Sinkhorn potentials as a dual certificate. Returns
/// [`Error::NotConverged`] when the sweep budget runs out before the final
/// scale reaches `tolerance`.
pub fn solve_entropic(cost: &CostMatrix, opts: &EntropicOptions) -> Result<MatchingResult> {
    if !(opts.epsilon > 0.0) || !(opts.tolerance > 0.0) || opts.max_iters == 0 {
        return Err(Error::InvalidParameter("entropic options need positive epsilon, tolerance and budget".into()));
    }
    let n = cost.n();
    let log_mass = -(n as f64).ln();
    let mut pot = Potentials { f: vec![0.0; n], g: vec![0.0; n] };
    let cost_t = cost.transpose();

    let mut scales = Vec::new();
    let mut eps = cost.max_entry().max(opts.epsilon);
    while eps > opts.epsilon {
        scales.push(eps);
        eps /= 2.0;
    }
    scales.push(opts.epsilon);

    let mut used = 0usize;
    let mut err = f64::INFINITY;
    for (k, &eps) in scales.iter().enumerate() {
        let last = k + 1 == scales.len();
        let stop = if last { opts.tolerance } else { opts.tolerance.max(1e-2) };
        loop {
            if used >= opts.max_iters {
                return Err(Error::NotConverged { iterations: used, marginal_error: err });
            }
            pot.update_rows(cost, eps, log_mass);
            pot.update_cols(&cost_t, eps, log_mass);
            pot.update_rows(cost, eps, log_mass);
            used += 1;
            err = pot.column_error(&cost_t, eps);
            if err <= stop {
                break;
            }
        }
    }

    let perm = round_to_permutation(cost, &pot.f, &pot.g);
    let total = cost.cost_of(&perm);
    let gap = duality_gap(cost, &perm, total, &pot.f, &pot.g);
    let mut result = MatchingResult::new(perm, total, SolverKind::Entropic);
    result.certified_optimal = false;
    result.gap_bound = gap.gap / n as f64;
    Ok(result)
}

/// Greedy rounding: take plan entries in decreasing order, keeping those whose
/// row and column are still free.
fn round_to_permutation(cost: &CostMatrix, f: &[f64], g: &[f64]) -> Vec<usize> {
    let n = cost.n();
    let mut order: Vec<(f64, u32, u32)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (f[i] + g[j] - cost.get(i, j), i as u32, j as u32))
        .collect();
    order.par_sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut perm = vec![usize::MAX; n];
    let mut col_used = vec![false; n];
    let mut placed = 0;
    for (_, i, j) in order {
        let (i, j) = (i as usize, j as usize);
        if perm[i] == usize::MAX && !col_used[j] {
            perm[i] = j;
            col_used[j] = true;
            placed += 1;
            if placed == n {
                break;
            }
        }
    }
    perm
}
