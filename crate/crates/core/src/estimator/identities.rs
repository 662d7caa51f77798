use serde::Serialize;

use super::verdict::{Status, Verdict};
use crate::dynsys::{orbit_segment, segment_distance, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::matching::{cost_matrix_from_segments, match_segments, solve_matrix, CostMatrix, SolverConfig};

/// Tolerance for the finite-`n` symmetry and triangle identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Aligned Cesaro gap `(1/n) sum_{k=1}^n d(T^k x, T^k y)`.
pub fn mean_gap(spec: &SystemSpec, x: &SpacePoint, y: &SpacePoint, n: usize) -> Result<f64> {
    let ox = orbit_segment(spec, x, n, 1)?;
    let oy = orbit_segment(spec, y, n, 1)?;
    Ok(aligned_gap(spec, &ox, &oy, n))
}

pub(crate) fn aligned_gap(spec: &SystemSpec, a: &OrbitSegment, b: &OrbitSegment, n: usize) -> f64 {
    (0..n).map(|k| segment_distance(&spec.space, a, k, b, k)).sum::<f64>() / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftCheck {
    pub r: usize,
    pub s: usize,
    pub n: usize,
    pub shifted: f64,
    pub unshifted: f64,
    pub difference: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

/// Compare `F_n(T^r x, T^s y)` with `F_n(x, y)`. The two orbit windows share
/// all but `r` (resp. `s`) points, so the difference is at most
/// `(r + s) M / n`.
pub fn shift_invariance_check(
    spec: &SystemSpec,
    x: &SpacePoint,
    y: &SpacePoint,
    r: usize,
    s: usize,
    n: usize,
    solver: &SolverConfig,
) -> Result<ShiftCheck> {
    if n <= r + s {
        return Err(Error::InvalidParameter(format!("need n > r + s, got n = {n}, r + s = {}", r + s)));
    }
    let ox = orbit_segment(spec, x, n, 1)?;
    let oy = orbit_segment(spec, y, n, 1)?;
    let sx = orbit_segment(spec, x, n, 1 + r)?;
    let sy = orbit_segment(spec, y, n, 1 + s)?;
    let unshifted = match_segments(&spec.space, &ox, &oy, n, solver)?.mean_cost;
    let shifted = match_segments(&spec.space, &sx, &sy, n, solver)?.mean_cost;
    let difference = (shifted - unshifted).abs();
    let bound = (r + s) as f64 * spec.diameter() / n as f64 + 1e-9;
    let verdict = if difference <= bound {
        Verdict::new(Status::Holds, bound - difference, format!("|difference| {difference:.6e} <= {bound:.6e}"))
    } else {
        Verdict::new(Status::Fails, difference - bound, format!("|difference| {difference:.6e} > {bound:.6e}"))
    };
    Ok(ShiftCheck { r, s, n, shifted, unshifted, difference, bound, verdict })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairValue {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// `"symmetry"` or `"triangle"`.
    pub identity: &'static str,
    pub detail: String,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub n: usize,
    /// All six ordered values `F_n(p_i, p_j)`, `i != j`.
    pub values: Vec<PairValue>,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Finite-`n` symmetry and triangle inequality of `F_n` on a triple.
pub fn property_check(
    spec: &SystemSpec,
    points: &[SpacePoint; 3],
    n: usize,
    solver: &SolverConfig,
) -> Result<PropertyReport> {
    property_check_with(spec, points, n, solver, |_, _, _| {})
}

/// [`property_check`] with a hook that may alter each ordered pair's cost
/// matrix before solving, for fault injection. Matrix solvers are forced so
/// the hook always takes effect.
pub fn property_check_with<H>(
    spec: &SystemSpec,
    points: &[SpacePoint; 3],
    n: usize,
    solver: &SolverConfig,
    hook: H,
) -> Result<PropertyReport>
where
    H: Fn(usize, usize, &mut CostMatrix),
{
    let orbits = points
        .iter()
        .map(|p| orbit_segment(spec, p, n, 1))
        .collect::<Result<Vec<_>>>()?;
    let kind = match solver.resolve(&spec.space, n)? {
        k if k.is_exact() => crate::matching::SolverKind::Exact,
        k => k,
    };
    let mut f = [[0.0f64; 3]; 3];
    let mut values = Vec::with_capacity(6);
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let mut cost = cost_matrix_from_segments(&spec.space, &orbits[i], &orbits[j], n)?;
            hook(i, j, &mut cost);
            f[i][j] = solve_matrix(&cost, kind, solver)?.mean_cost;
            values.push(PairValue { from: i, to: j, value: f[i][j] });
        }
    }
    let mut violations = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let excess = (f[i][j] - f[j][i]).abs() - IDENTITY_TOLERANCE;
            if excess > 0.0 {
                violations.push(Violation {
                    identity: "symmetry",
                    detail: format!("F({i},{j}) = {:.17e} but F({j},{i}) = {:.17e}", f[i][j], f[j][i]),
                    excess,
                });
            }
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                if a == b || b == c || a == c {
                    continue;
                }
                let excess = f[a][c] - f[a][b] - f[b][c] - IDENTITY_TOLERANCE;
                if excess > 0.0 {
                    violations.push(Violation {
                        identity: "triangle",
                        detail: format!("F({a},{c}) exceeds F({a},{b}) + F({b},{c})"),
                        excess,
                    });
                }
            }
        }
    }
    Ok(PropertyReport { n, values, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::Real;
    use crate::estimator::f_sequence;
    use crate::estimator::Schedule;

    #[test]
    fn mean_gap_basics() {
        let x = SpacePoint::interval(Real::ratio(1, 5));
        let y = SpacePoint::interval(Real::ratio(7, 10));
        assert!((mean_gap(&SystemSpec::identity(), &x, &y, 10).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mean_gap(&SystemSpec::identity(), &x, &x, 10).unwrap(), 0.0);
    }

    #[test]
    fn mean_gap_dominates_f_n() {
        let spec = SystemSpec::doubling();
        let x = SpacePoint::circle(Real::ratio(1, 7));
        let y = SpacePoint::circle(Real::ratio(3, 11));
        let seq = f_sequence(&spec, &x, &y, &Schedule::powers_of_two(0, 6).unwrap(), &SolverConfig::default()).unwrap();
        for (n, f) in seq.schedule.points().iter().zip(&seq.values) {
            assert!(*f <= mean_gap(&spec, &x, &y, *n).unwrap() + 1e-15);
        }
    }

    #[test]
    fn shift_check_trivial_cases() {
        let spec = SystemSpec::golden_rotation();
        let x = SpacePoint::circle(Real::ratio(1, 10));
        let y = SpacePoint::circle(Real::ratio(1, 3));
        let c = shift_invariance_check(&spec, &x, &y, 0, 0, 32, &SolverConfig::default()).unwrap();
        assert_eq!(c.difference, 0.0);
        let c = shift_invariance_check(&spec, &x, &y, 4, 0, 256, &SolverConfig::default()).unwrap();
        assert_eq!(c.verdict.status, Status::Holds);
        assert!(c.difference <= 4.0 * 0.5 / 256.0 + 1e-9);
        assert!(shift_invariance_check(&spec, &x, &y, 4, 4, 8, &SolverConfig::default()).is_err());
    }

    #[test]
    fn degenerate_triple() {
        let x = SpacePoint::circle(Real::ratio(1, 10));
        let r = property_check(&SystemSpec::doubling(), &[x.clone(), x.clone(), x], 16, &SolverConfig::default()).unwrap();
        assert!(r.holds());
        assert!(r.values.iter().all(|v| v.value == 0.0));
        assert_eq!(r.values.len(), 6);
    }

    #[test]
    fn corrupted_matrix_is_named() {
        let pts = [
            SpacePoint::circle(Real::ratio(1, 10)),
            SpacePoint::circle(Real::ratio(1, 3)),
            SpacePoint::circle(Real::ratio(5, 7)),
        ];
        let r = property_check_with(&SystemSpec::golden_rotation(), &pts, 8, &SolverConfig::default(), |i, j, c| {
            if (i, j) == (0, 1) {
                for e in c.entries_mut() {
                    *e += 0.1;
                }
            }
        })
        .unwrap();
        assert!(r.violations.iter().any(|v| v.identity == "symmetry"));
    }
}
