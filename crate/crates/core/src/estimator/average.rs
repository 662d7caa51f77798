use serde::{Deserialize, Serialize};

use super::observable::{default_battery, Observable};
use super::sequence::{check_tail_fraction, Schedule, DEFAULT_TAIL_FRACTION};
use super::verdict::{Status, Verdict, DEFAULT_MEMBERSHIP_TOLERANCE};
use crate::dynsys::{orbit_segment, OrbitSegment, SpacePoint, SystemSpec};
use crate::error::{Error, Result};

/// Cesaro averages `(1/n) sum_{k=1}^n f(T^k x)` of one observable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeAverageReport {
    pub observable: String,
    pub base: SpacePoint,
    pub schedule: Schedule,
    /// Average at each schedule point.
    pub partial_averages: Vec<f64>,
    /// Average at the last schedule point.
    pub fstar_hat: f64,
    /// Every `n` from here to the last schedule point forms the tail.
    pub tail_start: usize,
    /// `max - min` of the averages over the tail.
    pub oscillation: f64,
    /// Largest increase `A(m) - A(n)`, `n < m`, inside the tail.
    pub rise: f64,
    /// Largest decrease `A(n) - A(m)`, `n < m`, inside the tail.
    pub fall: f64,
}

fn report_from_orbit(
    f: &Observable,
    base: &SpacePoint,
    orbit: &OrbitSegment,
    schedule: &Schedule,
    tail_fraction: f64,
) -> TimeAverageReport {
    let tail_start = schedule.tail_start(tail_fraction);
    let mut sum = 0.0;
    let mut partial_averages = Vec::with_capacity(schedule.len());
    let mut next = schedule.points().iter().peekable();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut rise, mut fall) = (0.0f64, 0.0f64);
    for (k, p) in orbit.points.iter().enumerate() {
        let n = k + 1;
        sum += f.eval(p);
        let avg = sum / n as f64;
        if n >= tail_start {
            if n > tail_start {
                rise = rise.max(avg - lo);
                fall = fall.max(hi - avg);
            }
            lo = lo.min(avg);
            hi = hi.max(avg);
        }
        if next.peek() == Some(&&n) {
            partial_averages.push(avg);
            next.next();
        }
    }
    TimeAverageReport {
        observable: f.id(),
        base: base.clone(),
        schedule: schedule.clone(),
        fstar_hat: *partial_averages.last().expect("schedule is nonempty"),
        partial_averages,
        tail_start,
        oscillation: hi - lo,
        rise,
        fall,
    }
}

/// Time averages of several observables along one orbit.
pub fn time_averages(
    spec: &SystemSpec,
    x: &SpacePoint,
    observables: &[Observable],
    schedule: &Schedule,
    tail_fraction: f64,
) -> Result<Vec<TimeAverageReport>> {
    check_tail_fraction(tail_fraction)?;
    for f in observables {
        f.validate(&spec.space)?;
    }
    let orbit = orbit_segment(spec, x, schedule.max(), 1)?;
    Ok(observables.iter().map(|f| report_from_orbit(f, x, &orbit, schedule, tail_fraction)).collect())
}

pub fn time_average(spec: &SystemSpec, f: &Observable, x: &SpacePoint, schedule: &Schedule) -> Result<TimeAverageReport> {
    let mut v = time_averages(spec, x, std::slice::from_ref(f), schedule, DEFAULT_TAIL_FRACTION)?;
    Ok(v.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenericConfig {
    pub schedule: Schedule,
    pub tolerance: f64,
    pub tail_fraction: f64,
    /// `None` selects [`default_battery`].
    pub observables: Option<Vec<Observable>>,
}

impl Default for GenericConfig {
    fn default() -> Self {
        GenericConfig {
            schedule: Schedule::default(),
            tolerance: DEFAULT_MEMBERSHIP_TOLERANCE,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            observables: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericReport {
    pub verdict: Verdict,
    pub averages: Vec<TimeAverageReport>,
}

/// Is `x` generic? Holds when every observable's tail oscillation is within
/// `tol`; fails when some observable oscillates by more than `3 tol` while
/// moving both up and down by more than `tol` inside the tail.
pub fn generic_probe_detail(spec: &SystemSpec, x: &SpacePoint, config: &GenericConfig) -> Result<GenericReport> {
    let battery = match &config.observables {
        Some(v) if v.is_empty() => return Err(Error::InvalidParameter("observable list is empty".into())),
        Some(v) => v.clone(),
        None => default_battery(&spec.space),
    };
    let averages = time_averages(spec, x, &battery, &config.schedule, config.tail_fraction)?;
    let tol = config.tolerance;
    let worst = averages
        .iter()
        .max_by(|a, b| a.oscillation.total_cmp(&b.oscillation))
        .expect("battery is nonempty");
    let witness = averages
        .iter()
        .filter(|r| r.oscillation > 3.0 * tol && r.rise > tol && r.fall > tol)
        .max_by(|a, b| a.oscillation.total_cmp(&b.oscillation));
    let verdict = if let Some(w) = witness {
        Verdict::new(
            Status::Fails,
            w.oscillation - 3.0 * tol,
            format!("{} oscillates by {:.6e} (rise {:.6e}, fall {:.6e})", w.observable, w.oscillation, w.rise, w.fall),
        )
    } else if worst.oscillation <= tol {
        Verdict::new(
            Status::Holds,
            tol - worst.oscillation,
            format!("largest oscillation {:.6e} from {}", worst.oscillation, worst.observable),
        )
    } else {
        Verdict::new(
            Status::Inconclusive,
            worst.oscillation,
            format!("{} oscillates by {:.6e} above tol {tol}", worst.observable, worst.oscillation),
        )
    };
    Ok(GenericReport { verdict, averages })
}

pub fn generic_probe(spec: &SystemSpec, x: &SpacePoint, config: &GenericConfig) -> Result<Verdict> {
    generic_probe_detail(spec, x, config).map(|r| r.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{Real, Word};

    #[test]
    fn identity_average_is_value() {
        let x = SpacePoint::interval(Real::ratio(3, 10));
        let r = time_average(&SystemSpec::identity(), &Observable::Coordinate, &x, &Schedule::powers_of_two(0, 4).unwrap())
            .unwrap();
        assert!(r.partial_averages.iter().all(|&a| (a - 0.3).abs() < 1e-15));
        assert!(r.oscillation < 1e-15);
    }

    #[test]
    fn paper_s1_coordinate_average() {
        let r = time_average(
            &SystemSpec::paper_s1(),
            &Observable::Coordinate,
            &SpacePoint::circle(Real::ratio(0, 1)),
            &Schedule::powers_of_two(1, 8).unwrap(),
        )
        .unwrap();
        assert_eq!(r.fstar_hat, 0.25);
    }

    #[test]
    fn fixed_point_is_generic() {
        let v = generic_probe(&SystemSpec::doubling(), &SpacePoint::circle(Real::ratio(0, 1)), &GenericConfig::default())
            .unwrap();
        assert_eq!(v.status, Status::Holds);
    }

    #[test]
    fn block_stream_is_not_generic() {
        let spec = SystemSpec::full_shift(2).unwrap();
        let x = SpacePoint::Shift(Word::alternating_blocks(4096 + 64));
        let cfg = GenericConfig { observables: Some(vec![Observable::Cylinder { symbol: 1 }]), ..Default::default() };
        let v = generic_probe(&spec, &x, &cfg).unwrap();
        assert_eq!(v.status, Status::Fails, "{}", v.diagnostics);
    }
}
