use serde::{Deserialize, Serialize};

use crate::dynsys::{MetricSpaceDescriptor, SpacePoint};
use crate::error::{Error, Result};

/// Bounded test functions for time averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    /// The real coordinate itself (for words, the base-`a` expansion).
    Coordinate,
    /// `2 min(t, 1 - t)`: scaled arc distance to 0, continuous on the circle.
    ArcFromZero,
    /// Indicator of `[lo, hi)`.
    Cell { lo: f64, hi: f64 },
    /// `(1 - (r / width)^2)^2` for `r < width`, `r` the distance to `center`.
    Bump { center: f64, width: f64 },
    /// Indicator that the first symbol equals `symbol`.
    Cylinder { symbol: u8 },
}

impl Observable {
    pub fn id(&self) -> String {
        match self {
            Observable::Coordinate => "coordinate".into(),
            Observable::ArcFromZero => "arc-from-zero".into(),
            Observable::Cell { lo, hi } => format!("cell[{lo},{hi})"),
            Observable::Bump { center, width } => format!("bump({center},{width})"),
            Observable::Cylinder { symbol } => format!("cylinder[{symbol}]"),
        }
    }

    pub fn validate(&self, space: &MetricSpaceDescriptor) -> Result<()> {
        let ok = match (self, space) {
            (Observable::Cylinder { symbol }, MetricSpaceDescriptor::Shift { alphabet }) => symbol < alphabet,
            (Observable::Cylinder { .. }, _) => false,
            (Observable::Cell { lo, hi }, _) => lo < hi,
            (Observable::Bump { width, .. }, _) => *width > 0.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("observable {} does not apply to {}", self.id(), space.name())))
        }
    }

    pub fn eval(&self, p: &SpacePoint) -> f64 {
        let t = p.coordinate();
        match self {
            Observable::Coordinate => t,
            Observable::ArcFromZero => 2.0 * t.min(1.0 - t),
            Observable::Cell { lo, hi } => f64::from(u8::from(*lo <= t && t < *hi)),
            Observable::Bump { center, width } => {
                let mut r = (t - center).abs();
                if matches!(p, SpacePoint::Circle(_)) {
                    r = r.min(1.0 - r);
                }
                let u = r / width;
                if u < 1.0 {
                    (1.0 - u * u).powi(2)
                } else {
                    0.0
                }
            }
            Observable::Cylinder { symbol } => {
                let first = p.word().and_then(|w| w.symbol(0));
                f64::from(u8::from(first == Some(*symbol)))
            }
        }
    }

    /// `(min, max)` of the observable's range.
    pub fn range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Fixed observable battery used by genericity probes: for real spaces the
/// coordinate, the indicators of the eight dyadic cells of length 1/8 and four
/// bumps of width 1/4; for shift spaces the coordinate and every one-symbol
/// cylinder.
pub fn default_battery(space: &MetricSpaceDescriptor) -> Vec<Observable> {
    let mut out = vec![Observable::Coordinate];
    match space {
        MetricSpaceDescriptor::Shift { alphabet } => {
            out.extend((0..*alphabet).map(|symbol| Observable::Cylinder { symbol }));
        }
        _ => {
            out.extend((0..8).map(|k| Observable::Cell { lo: k as f64 / 8.0, hi: (k + 1) as f64 / 8.0 }));
            out.extend((0..4).map(|k| Observable::Bump { center: (2 * k + 1) as f64 / 8.0, width: 0.25 }));
        }
    }
    out
}
