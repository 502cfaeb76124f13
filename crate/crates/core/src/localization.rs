//! Result record shared by both solvers, plus the sensor-count dispatcher.

use serde::Serialize;

use crate::error::Result;
use crate::geom3::{PivotDiagnostics, Vec3};
use crate::measurement::{RangeDifferences, ReferencedArray, SensorArray};
use crate::{solver4, solver5};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    FiveSensor,
    FourSensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AmbiguityResolution {
    /// Two admissible roots; the smaller TDOA residual won.
    Residual,
    /// Only one admissible root survived.
    SingleRoot,
    /// Five-sensor solve, no sign ambiguity exists.
    NotApplicable,
}

/// One candidate source position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    /// Range from the source to the reference sensor.
    pub rho1: f64,
    /// Absolute position.
    pub position: Vec3,
    /// Sum of squared range-difference mismatches, m^2.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub pivots: PivotDiagnostics,
    /// 1-based (k, j) pairings of the five-sensor rows.
    pub pairings: Option<[(usize, usize); 3]>,
    /// Which five-sensor rows used the delta-cleared form.
    pub scaled_rows: Option<[bool; 3]>,
    /// The rho_1 quadratic degenerated to a linear equation.
    pub linear_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationResult {
    /// Estimated absolute source position.
    pub position: Vec3,
    pub method: Method,
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the returned position.
    pub selected: usize,
    pub ambiguity_resolved_by: AmbiguityResolution,
    /// Set when two candidates tied on residual and the first was taken.
    pub ambiguous: bool,
    pub diagnostics: Diagnostics,
}

impl LocalizationResult {
    /// Candidates other than the selected one.
    pub fn rejected(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.selected)
            .map(|(_, c)| c)
    }
}

/// Sum of squared mismatches between range differences implied by a
/// reference-frame position and the measured ones.
pub fn tdoa_residual(rel: &ReferencedArray, d: &RangeDifferences, r_s: Vec3) -> f64 {
    let rho1 = r_s.norm();
    rel.rel_positions[1..]
        .iter()
        .zip(d.as_slice())
        .map(|(&r_k, &delta)| {
            let e = (r_k.distance(r_s) - rho1) - delta;
            e * e
        })
        .sum()
}

/// Runs the solver matching the array size.
pub fn locate(sensors: &SensorArray, d: &RangeDifferences) -> Result<LocalizationResult> {
    match sensors.len() {
        5 => solver5::solve_5(sensors, d),
        _ => solver4::solve_4(sensors, d),
    }
}
