//! Forward model and reference-frame bookkeeping.
//!
//! Sensor 1 (index 0) is always the reference: all solver algebra runs in the
//! frame where it sits at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::Vec3;

/// Minimum pairwise separation between sensors (and between source and sensors), meters.
pub const EPS_SEP: f64 = 1e-9;

/// Slack allowed on the triangle inequality `|delta_k1| <= |r_k - r_1|`.
const TRIANGLE_SLACK: f64 = 1e-9;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Absolute sensor positions; index 0 is the reference sensor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorArray {
    positions: Vec<Vec3>,
}

impl SensorArray {
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        if !(4..=5).contains(&positions.len()) {
            return Err(Error::InvalidArray(format!(
                "expected 4 or 5 sensors, got {}",
                positions.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "sensor {} has a non-finite coordinate",
                i + 1
            )));
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if positions[i].distance(positions[j]) <= EPS_SEP {
                    return Err(Error::InvalidArray(format!(
                        "sensors {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn reference(&self) -> Vec3 {
        self.positions[0]
    }

    /// Largest pairwise sensor separation.
    pub fn max_baseline(&self) -> f64 {
        max_pairwise_distance(&self.positions)
    }
}

fn max_pairwise_distance(points: &[Vec3]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.distance(*b));
        }
    }
    best
}

/// Sensor positions relative to the reference sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencedArray {
    pub rel_positions: Vec<Vec3>,
    pub origin: Vec3,
}

impl ReferencedArray {
    pub fn len(&self) -> usize {
        self.rel_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel_positions.is_empty()
    }

    /// Relative position of 1-based sensor `k`.
    pub fn r(&self, k: usize) -> Vec3 {
        self.rel_positions[k - 1]
    }

    pub fn max_baseline(&self) -> f64 {
        max_pairwise_distance(&self.rel_positions)
    }
}

/// Measured range differences `delta_k1 = rho_k - rho_1`, k = 2..N, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDifferences {
    deltas: Vec<f64>,
    n_sensors: usize,
}

impl RangeDifferences {
    pub fn new(deltas: Vec<f64>, n_sensors: usize) -> Result<Self> {
        if !(4..=5).contains(&n_sensors) {
            return Err(Error::InvalidDeltas(format!(
                "sensor count must be 4 or 5, got {n_sensors}"
            )));
        }
        if deltas.len() != n_sensors - 1 {
            return Err(Error::InvalidDeltas(format!(
                "{} sensors need {} range differences, got {}",
                n_sensors,
                n_sensors - 1,
                deltas.len()
            )));
        }
        if deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidDeltas("non-finite range difference".into()));
        }
        Ok(Self { deltas, n_sensors })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.deltas
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    /// `delta_k1` for 1-based sensor `k >= 2`.
    pub fn delta(&self, k: usize) -> f64 {
        self.deltas[k - 2]
    }

    /// Checks arity and the triangle inequality against a sensor array.
    pub fn check_against(&self, sensors: &SensorArray) -> Result<()> {
        if sensors.len() != self.n_sensors {
            return Err(Error::InvalidDeltas(format!(
                "{} range differences given for {} sensors",
                self.deltas.len(),
                sensors.len()
            )));
        }
        let r1 = sensors.reference();
        for (i, (&d, p)) in self
            .deltas
            .iter()
            .zip(&sensors.positions()[1..])
            .enumerate()
        {
            let baseline = p.distance(r1);
            if d.abs() > baseline * (1.0 + TRIANGLE_SLACK) {
                return Err(Error::InvalidDeltas(format!(
                    "|delta_{}1| = {} exceeds the baseline {} to the reference sensor",
                    i + 2,
                    d.abs(),
                    baseline
                )));
            }
        }
        Ok(())
    }
}

/// A truth configuration: sensors plus the absolute source position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub sensors: SensorArray,
    pub source: Vec3,
}

impl Scenario {
    pub fn new(sensors: SensorArray, source: Vec3) -> Result<Self> {
        if !source.is_finite() {
            return Err(Error::InvalidScenario("non-finite source".into()));
        }
        if let Some(i) = sensors
            .positions()
            .iter()
            .position(|p| p.distance(source) <= EPS_SEP)
        {
            return Err(Error::InvalidScenario(format!(
                "source coincides with sensor {}",
                i + 1
            )));
        }
        Ok(Self { sensors, source })
    }
}

/// Moves the reference sensor to the origin.
pub fn reference_frame(sensors: &SensorArray) -> ReferencedArray {
    let origin = sensors.reference();
    ReferencedArray {
        rel_positions: sensors.positions().iter().map(|&p| p - origin).collect(),
        origin,
    }
}

/// Source-to-sensor distances `rho_k`, evaluated in the reference frame.
pub fn true_ranges(scenario: &Scenario) -> Vec<f64> {
    let rel = reference_frame(&scenario.sensors);
    let source = scenario.source - rel.origin;
    rel.rel_positions
        .iter()
        .map(|&r| r.distance(source))
        .collect()
}

/// Noise-free range differences `rho_k - rho_1` for a truth scenario.
pub fn range_differences(scenario: &Scenario) -> RangeDifferences {
    let rho = true_ranges(scenario);
    let deltas = rho[1..].iter().map(|&r| r - rho[0]).collect();
    RangeDifferences {
        deltas,
        n_sensors: rho.len(),
    }
}

/// Converts an arrival-time difference (seconds) to a range difference (meters).
pub fn tdoa_to_range_diff(dt: f64, c: f64) -> f64 {
    c * dt
}

/// Range differences from absolute arrival times, `delta_k1 = c (t_k - t_1)`.
pub fn times_to_range_differences(times: &[f64], c: f64) -> Result<RangeDifferences> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidDeltas(format!(
            "propagation speed must be positive, got {c}"
        )));
    }
    let Some((&t1, rest)) = times.split_first() else {
        return Err(Error::InvalidDeltas("no arrival times".into()));
    };
    let deltas = rest
        .iter()
        .map(|&t| tdoa_to_range_diff(t - t1, c))
        .collect();
    RangeDifferences::new(deltas, times.len())
}

/// Maps a reference-frame position back to absolute coordinates.
pub fn unreference(r_s: Vec3, origin: Vec3) -> Vec3 {
    r_s + origin
}
