//! Minimum-cost perfect matching between orbit segments.
//!
//! The infimum over permutations in `F_n` is attained, so it is computed as
//! an assignment problem on the `n x n` matrix of pairwise distances. Several
//! solvers are provided:
//!
//! - [`solve_bruteforce`]: literal enumeration of all permutations, `n <= 9`.
//! - [`solve_exact`]: shortest augmenting path (Hungarian) with a dual
//!   feasibility certificate.
//! - [`solve_sorted_line`] and [`solve_cyclic_circle`]: the classical 1-D
//!   shortcuts for the interval and circle metrics.
//! - [`solve_entropic`]: log-domain Sinkhorn with rounding to a permutation and
//!   a duality-gap bound.

mod bruteforce;
mod entropic;
mod hungarian;
mod line;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{distance, orbit_segment, MetricSpaceDescriptor, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};

pub use bruteforce::{solve_bruteforce, BRUTEFORCE_MAX};
pub use entropic::{solve_entropic, EntropicOptions};
pub use hungarian::solve_exact;
pub use line::{circle_distance, solve_cyclic_circle, solve_cyclic_circle_scan, solve_sorted_line};

/// Dense row-major matrix of pairwise orbit distances.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyOrbit);
        }
        if entries.len() != n * n {
            return Err(Error::LengthMismatch { left: entries.len(), right: n * n });
        }
        if let Some(bad) = entries.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidParameter(format!("cost entry {bad} is not a finite nonnegative real")));
        }
        Ok(CostMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch { left: r.len(), right: n });
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        CostMatrix { n, entries: vec![0.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> CostMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        CostMatrix { n, entries }
    }

    /// Mutable access for fault-injection harnesses.
    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Total cost of a permutation, `sum_i C[i][perm[i]]`.
    pub fn cost_of(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Auto,
    Exact,
    Bruteforce,
    Sorted,
    Cyclic,
    Entropic,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Auto => "auto",
            SolverKind::Exact => "exact",
            SolverKind::Bruteforce => "bruteforce",
            SolverKind::Sorted => "sorted",
            SolverKind::Cyclic => "cyclic",
            SolverKind::Entropic => "entropic",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, SolverKind::Entropic)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SolverKind::Auto,
            "exact" => SolverKind::Exact,
            "bruteforce" => SolverKind::Bruteforce,
            "sorted" => SolverKind::Sorted,
            "cyclic" => SolverKind::Cyclic,
            "entropic" => SolverKind::Entropic,
            other => return Err(Error::Parse(format!("unknown solver {other:?}"))),
        })
    }
}

/// Outcome of one assignment solve. `permutation[i] = j` pairs the `i`-th
/// point of the first sample with the `j`-th of the second (0-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingResult {
    pub permutation: Vec<usize>,
    pub total_cost: f64,
    pub mean_cost: f64,
    pub solver: SolverKind,
    pub certified_optimal: bool,
    pub gap_bound: f64,
}

impl MatchingResult {
    pub(crate) fn new(permutation: Vec<usize>, total_cost: f64, solver: SolverKind) -> Self {
        let n = permutation.len().max(1);
        MatchingResult {
            permutation,
            total_cost,
            mean_cost: total_cost / n as f64,
            solver,
            certified_optimal: solver.is_exact(),
            gap_bound: 0.0,
        }
    }

    /// Check that the permutation is a bijection and that its recomputed
    /// cost agrees with `total_cost` to `1e-12` relative.
    pub fn verify(&self, cost: &CostMatrix) -> Result<()> {
        verify_bijection(&self.permutation, cost.n())?;
        check_total(self.total_cost, cost.cost_of(&self.permutation))
    }
}

pub(crate) fn verify_bijection(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::LengthMismatch { left: perm.len(), right: n });
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidParameter(format!("permutation is not a bijection at image {j}")));
        }
    }
    Ok(())
}

pub(crate) fn check_total(claimed: f64, recomputed: f64) -> Result<()> {
    if (claimed - recomputed).abs() > 1e-12 * claimed.abs().max(recomputed.abs()).max(1e-300) {
        return Err(Error::InvalidParameter(format!(
            "reported cost {claimed} disagrees with recomputed {recomputed}"
        )));
    }
    Ok(())
}

/// Solver selection and tuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Largest `n` for which `auto` uses the exact solver on non-1-D metrics.
    pub exact_threshold: usize,
    pub entropic: EntropicOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { kind: SolverKind::Auto, exact_threshold: 512, entropic: EntropicOptions::default() }
    }
}

impl SolverConfig {
    pub fn with_kind(kind: SolverKind) -> Self {
        SolverConfig { kind, ..Self::default() }
    }

    /// The concrete solver `auto` stands for on `space` at size `n`.
    pub fn resolve(&self, space: &MetricSpaceDescriptor, n: usize) -> Result<SolverKind> {
        let kind = match self.kind {
            SolverKind::Auto => match space {
                MetricSpaceDescriptor::UnitInterval => SolverKind::Sorted,
                MetricSpaceDescriptor::Circle => SolverKind::Cyclic,
                MetricSpaceDescriptor::Shift { .. } if n <= self.exact_threshold => SolverKind::Exact,
                MetricSpaceDescriptor::Shift { .. } => SolverKind::Entropic,
            },
            k => k,
        };
        let ok = match kind {
            SolverKind::Sorted => matches!(space, MetricSpaceDescriptor::UnitInterval),
            SolverKind::Cyclic => matches!(space, MetricSpaceDescriptor::Circle),
            _ => true,
        };
        if !ok {
            return Err(Error::SolverMetricMismatch { solver: kind.name(), space: space.name() });
        }
        Ok(kind)
    }
}

/// Cost matrix between the first `n` points of two segments.
pub fn cost_matrix_from_segments(
    space: &MetricSpaceDescriptor,
    a: &OrbitSegment,
    b: &OrbitSegment,
    n: usize,
) -> Result<CostMatrix> {
    if a.len() < n || b.len() < n {
        return Err(Error::LengthMismatch { left: a.len().min(b.len()), right: n });
    }
    let entries: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (0..n).map(move |j| distance(space, &a.points[i], &b.points[j])))
        .collect::<Result<Vec<f64>>>()?;
    CostMatrix::new(n, entries)
}

/// `entries[i][j] = d(T^(i+1) x, T^(j+1) y)` for `i, j < n`.
pub fn cost_matrix(spec: &SystemSpec, x: &SpacePoint, y: &SpacePoint, n: usize) -> Result<CostMatrix> {
    let ox = orbit_segment(spec, x, n, 1)?;
    let oy = orbit_segment(spec, y, n, 1)?;
    cost_matrix_from_segments(&spec.space, &ox, &oy, n)
}

/// Solve a prebuilt matrix with a matrix-based solver.
pub fn solve_matrix(cost: &CostMatrix, kind: SolverKind, config: &SolverConfig) -> Result<MatchingResult> {
    match kind {
        SolverKind::Bruteforce => solve_bruteforce(cost),
        SolverKind::Entropic => solve_entropic(cost, &config.entropic),
        SolverKind::Exact | SolverKind::Auto => Ok(solve_exact(cost)),
        SolverKind::Sorted | SolverKind::Cyclic => {
            Err(Error::SolverMetricMismatch { solver: kind.name(), space: "matrix" })
        }
    }
}

/// Optimal matching between the first `n` points of two segments.
pub fn match_segments(
    space: &MetricSpaceDescriptor,
    a: &OrbitSegment,
    b: &OrbitSegment,
    n: usize,
    config: &SolverConfig,
) -> Result<MatchingResult> {
    if n == 0 {
        return Err(Error::EmptyOrbit);
    }
    let kind = config.resolve(space, n)?;
    match kind {
        SolverKind::Sorted => solve_sorted_line(&a.coordinates()[..n], &b.coordinates()[..n]),
        SolverKind::Cyclic => solve_cyclic_circle(&a.coordinates()[..n], &b.coordinates()[..n]),
        _ => {
            let cost = cost_matrix_from_segments(space, a, b, n)?;
            solve_matrix(&cost, kind, config)
        }
    }
}

/// Full solver output for `F_n(x, y)`.
pub fn f_n_detail(
    spec: &SystemSpec,
    x: &SpacePoint,
    y: &SpacePoint,
    n: usize,
    config: &SolverConfig,
) -> Result<MatchingResult> {
    config.resolve(&spec.space, n)?;
    let ox = orbit_segment(spec, x, n, 1)?;
    let oy = orbit_segment(spec, y, n, 1)?;
    match_segments(&spec.space, &ox, &oy, n, config)
}

/// `F_n(x, y) = min_s (1/n) sum_k d(T^k x, T^{s(k)} y)`.
pub fn f_n(spec: &SystemSpec, x: &SpacePoint, y: &SpacePoint, n: usize, config: &SolverConfig) -> Result<f64> {
    f_n_detail(spec, x, y, n, config).map(|r| r.mean_cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{Real, SystemSpec};

    fn circle(v: &str) -> SpacePoint {
        MetricSpaceDescriptor::Circle.point(v.parse().unwrap()).unwrap()
    }

    fn interval(v: &str) -> SpacePoint {
        MetricSpaceDescriptor::UnitInterval.point(v.parse().unwrap()).unwrap()
    }

    #[test]
    fn identity_cost_matrix_is_constant() {
        let c = cost_matrix(&SystemSpec::identity(), &interval("0.2"), &interval("0.9"), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.get(i, j) - 0.7).abs() < 1e-15);
            }
        }
        let one = cost_matrix(&SystemSpec::identity(), &interval("0.2"), &interval("0.9"), 1).unwrap();
        assert_eq!(one.n(), 1);
    }

    #[test]
    fn paper_s1_two_by_two() {
        let c = cost_matrix(&SystemSpec::paper_s1(), &circle("0"), &circle("1/2"), 2).unwrap();
        assert_eq!(c, CostMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap());
    }

    #[test]
    fn auto_resolution_and_mismatch() {
        let cfg = SolverConfig::default();
        assert_eq!(cfg.resolve(&MetricSpaceDescriptor::Circle, 10).unwrap(), SolverKind::Cyclic);
        assert_eq!(cfg.resolve(&MetricSpaceDescriptor::UnitInterval, 10).unwrap(), SolverKind::Sorted);
        let shift = MetricSpaceDescriptor::Shift { alphabet: 2 };
        assert_eq!(cfg.resolve(&shift, 512).unwrap(), SolverKind::Exact);
        assert_eq!(cfg.resolve(&shift, 513).unwrap(), SolverKind::Entropic);
        let sorted = SolverConfig::with_kind(SolverKind::Sorted);
        assert!(matches!(sorted.resolve(&shift, 4), Err(Error::SolverMetricMismatch { .. })));
    }

    #[test]
    fn f_n_of_a_point_with_itself_is_zero() {
        let spec = SystemSpec::golden_rotation();
        let x = circle("0.123");
        for kind in [SolverKind::Auto, SolverKind::Exact, SolverKind::Bruteforce] {
            let v = f_n(&spec, &x, &x, 6, &SolverConfig::with_kind(kind)).unwrap();
            assert!(v.abs() < 1e-15, "{kind}: {v}");
        }
    }

    #[test]
    fn identity_map_distance_constant_in_n() {
        let spec = SystemSpec::identity();
        let (x, y) = (interval("0.2"), interval("0.8"));
        for n in [1, 5, 40] {
            let v = f_n(&spec, &x, &y, n, &SolverConfig::default()).unwrap();
            assert!((v - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn transposed_matrix_has_equal_cost() {
        let spec = SystemSpec::doubling();
        let x = SpacePoint::circle(Real::ratio(1, 7));
        let y = SpacePoint::circle(Real::ratio(2, 9));
        let c = cost_matrix(&spec, &x, &y, 12).unwrap();
        let a = solve_exact(&c);
        let b = solve_exact(&c.transpose());
        assert!((a.total_cost - b.total_cost).abs() < 1e-12);
        a.verify(&c).unwrap();
    }

    #[test]
    fn verify_rejects_bad_permutations() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let mut r = solve_exact(&c);
        r.permutation = vec![0, 0];
        assert!(r.verify(&c).is_err());
        let mut r = solve_exact(&c);
        r.total_cost = 2.0;
        assert!(r.verify(&c).is_err());
    }

    #[test]
    fn bad_matrices_rejected() {
        assert!(CostMatrix::new(2, vec![0.0; 3]).is_err());
        assert!(CostMatrix::new(1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, vec![-1.0]).is_err());
        assert!(CostMatrix::new(0, vec![]).is_err());
    }
}
