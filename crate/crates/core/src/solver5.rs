//! Five-sensor solver: three linear equations in the source position,
//! with no sign ambiguity.
//!
//! Each row combines the `rho_1` expressions from sensors `k` and `j`,
//! which eliminates `rho_1` and leaves an equation linear in `r_S`.

use crate::error::{Error, Result};
use crate::geom3::{Lu3, Mat3, Vec3};
use crate::localization::{
    tdoa_residual, AmbiguityResolution, Candidate, Diagnostics, LocalizationResult, Method,
};
use crate::measurement::{
    reference_frame, unreference, RangeDifferences, ReferencedArray, SensorArray,
};

/// Below `EPS_DELTA * L` a range difference counts as zero and its rows use
/// the delta-cleared form.
pub const EPS_DELTA: f64 = 1e-9;

/// Default 1-based (k, j) pairings.
pub const DEFAULT_PAIRINGS: [(usize, usize); 3] = [(3, 2), (4, 3), (5, 4)];

#[derive(Debug, Clone, PartialEq)]
pub struct FiveSensorSystem {
    pub b: Mat3,
    pub x: Vec3,
    pub pairings: [(usize, usize); 3],
    pub scaled_rows: [bool; 3],
}

/// Row of `B` and entry of `x` for one pairing, divided through by `delta_j1`.
pub fn literal_row(rel: &ReferencedArray, d: &RangeDifferences, k: usize, j: usize) -> (Vec3, f64) {
    let (r_k, r_j) = (rel.r(k), rel.r(j));
    let (d_k, d_j) = (d.delta(k), d.delta(j));
    let ratio = d_k / d_j;
    let row = 2.0 * (r_k - ratio * r_j);
    let rhs = -(d_k * d_k - ratio * d_j * d_j) + (r_k.norm_squared() - ratio * r_j.norm_squared());
    (row, rhs)
}

/// Same equation multiplied through by `delta_j1`; defined at `delta_j1 = 0`.
pub fn cleared_row(rel: &ReferencedArray, d: &RangeDifferences, k: usize, j: usize) -> (Vec3, f64) {
    let (r_k, r_j) = (rel.r(k), rel.r(j));
    let (d_k, d_j) = (d.delta(k), d.delta(j));
    let row = 2.0 * (d_j * r_k - d_k * r_j);
    let rhs = -d_k * d_j * (d_k - d_j) + d_j * r_k.norm_squared() - d_k * r_j.norm_squared();
    (row, rhs)
}

fn check_five(rel: &ReferencedArray, d: &RangeDifferences) -> Result<()> {
    if rel.len() != 5 || d.n_sensors() != 5 {
        return Err(Error::InvalidArray(format!(
            "five-sensor solver needs 5 sensors and 4 range differences, got {} and {}",
            rel.len(),
            d.as_slice().len()
        )));
    }
    Ok(())
}

/// Assembles `B r_S = x` for the given pairings.
pub fn build_system_5_with(
    rel: &ReferencedArray,
    d: &RangeDifferences,
    pairings: [(usize, usize); 3],
) -> Result<FiveSensorSystem> {
    check_five(rel, d)?;
    let floor = EPS_DELTA * rel.max_baseline();
    let mut rows = [Vec3::ZERO; 3];
    let mut x = [0.0; 3];
    let mut scaled_rows = [false; 3];

    for (i, &(k, j)) in pairings.iter().enumerate() {
        let (d_k, d_j) = (d.delta(k).abs(), d.delta(j).abs());
        if d_k < floor && d_j < floor {
            return Err(Error::DegenerateDeltas { k, j });
        }
        let (row, rhs) = if d_k.min(d_j) >= floor {
            literal_row(rel, d, k, j)
        } else {
            scaled_rows[i] = true;
            cleared_row(rel, d, k, j)
        };
        rows[i] = row;
        x[i] = rhs;
    }

    Ok(FiveSensorSystem {
        b: Mat3 { rows },
        x: Vec3::from(x),
        pairings,
        scaled_rows,
    })
}

/// Assembles the system with the default pairings.
pub fn build_system_5(rel: &ReferencedArray, d: &RangeDifferences) -> Result<FiveSensorSystem> {
    build_system_5_with(rel, d, DEFAULT_PAIRINGS)
}

/// Pairing chains tried in order: every ordering of sensors 2..5, each
/// linked consecutively. The identity ordering gives [`DEFAULT_PAIRINGS`].
pub fn pairing_chains() -> impl Iterator<Item = [(usize, usize); 3]> {
    let mut orders = Vec::with_capacity(24);
    for a in 2..=5 {
        for b in 2..=5 {
            for c in 2..=5 {
                for e in 2..=5 {
                    let o = [a, b, c, e];
                    let distinct = (0..4).all(|i| (i + 1..4).all(|j| o[i] != o[j]));
                    if distinct {
                        orders.push(o);
                    }
                }
            }
        }
    }
    orders
        .into_iter()
        .map(|o| [(o[1], o[0]), (o[2], o[1]), (o[3], o[2])])
}

/// Locates the source from five sensors.
///
/// The default pairing is tried first; if it is degenerate or singular the
/// remaining pairing chains are tried before the first error is returned.
pub fn solve_5(sensors: &SensorArray, d: &RangeDifferences) -> Result<LocalizationResult> {
    d.check_against(sensors)?;
    let rel = reference_frame(sensors);
    check_five(&rel, d)?;

    let mut first_err = None;
    for pairings in pairing_chains() {
        let attempt = build_system_5_with(&rel, d, pairings)
            .and_then(|sys| Lu3::factor(&sys.b).map(|lu| (sys, lu)));
        match attempt {
            Ok((sys, lu)) => {
                let r_s = lu.solve(sys.x);
                let position = unreference(r_s, rel.origin);
                return Ok(LocalizationResult {
                    position,
                    method: Method::FiveSensor,
                    candidates: vec![Candidate {
                        rho1: r_s.norm(),
                        position,
                        residual: tdoa_residual(&rel, d, r_s),
                    }],
                    selected: 0,
                    ambiguity_resolved_by: AmbiguityResolution::NotApplicable,
                    ambiguous: false,
                    diagnostics: Diagnostics {
                        pivots: lu.diagnostics(),
                        pairings: Some(sys.pairings),
                        scaled_rows: Some(sys.scaled_rows),
                        linear_fallback: false,
                    },
                });
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one pairing chain"))
}
