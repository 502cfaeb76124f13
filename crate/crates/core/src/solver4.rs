//! Four-sensor solver: a linear system parameterized by `rho_1`, closed by
//! the quadratic constraint `|r_S| = rho_1`, with the resulting sign
//! ambiguity resolved by TDOA residual.

use crate::error::{Error, Result};
use crate::geom3::{Lu3, Mat3, PivotDiagnostics, Vec3};
use crate::localization::{
    tdoa_residual, AmbiguityResolution, Candidate, Diagnostics, LocalizationResult, Method,
};
use crate::measurement::{
    reference_frame, unreference, RangeDifferences, ReferencedArray, SensorArray,
};

/// `|a| < EPS_LIN * (xi.xi + 1)` switches to the linear fallback.
pub const EPS_LIN: f64 = 1e-12;
/// Negative discriminants down to `-EPS_DISC * b_half^2` are treated as tangency.
pub const EPS_DISC: f64 = 1e-9;
/// Roots down to `-EPS_RHO * L` are clamped to zero.
pub const EPS_RHO: f64 = 1e-12;
/// Residuals closer than `EPS_TIE * L^2` count as a tie.
pub const EPS_TIE: f64 = 1e-9;

/// `rho_1 z = y + C r_S` together with `xi = C^-1 z` and `eta = C^-1 y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourSensorSystem {
    pub c: Mat3,
    pub z: Vec3,
    pub y: Vec3,
    pub xi: Vec3,
    pub eta: Vec3,
    pub pivots: PivotDiagnostics,
    /// Largest sensor baseline, sets the scale of the root tolerances.
    pub baseline: f64,
}

/// Roots of `a rho^2 - 2 b_half rho + c_coef = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRoots {
    pub a: f64,
    pub b_half: f64,
    pub c_coef: f64,
    pub discriminant: f64,
    /// Admissible roots, ascending.
    pub roots: Vec<f64>,
    pub linear_fallback: bool,
}

impl QuadraticRoots {
    /// Value of the quadratic at `rho`.
    pub fn eval(&self, rho: f64) -> f64 {
        self.a * rho * rho - 2.0 * self.b_half * rho + self.c_coef
    }
}

pub fn build_system_4(rel: &ReferencedArray, d: &RangeDifferences) -> Result<FourSensorSystem> {
    if rel.len() != 4 || d.n_sensors() != 4 {
        return Err(Error::InvalidArray(format!(
            "four-sensor solver needs 4 sensors and 3 range differences, got {} and {}",
            rel.len(),
            d.as_slice().len()
        )));
    }
    let mut rows = [Vec3::ZERO; 3];
    let mut z = [0.0; 3];
    let mut y = [0.0; 3];
    for (i, k) in (2..=4).enumerate() {
        let r_k = rel.r(k);
        let delta = d.delta(k);
        rows[i] = -2.0 * r_k;
        z[i] = 2.0 * delta;
        y[i] = r_k.norm_squared() - delta * delta;
    }
    let c = Mat3 { rows };
    let (z, y) = (Vec3::from(z), Vec3::from(y));
    let lu = Lu3::factor(&c)?;
    Ok(FourSensorSystem {
        c,
        z,
        y,
        xi: lu.solve(z),
        eta: lu.solve(y),
        pivots: lu.diagnostics(),
        baseline: rel.max_baseline(),
    })
}

/// Solves the `rho_1` quadratic, keeping only physically admissible roots.
pub fn solve_rho1(sys: &FourSensorSystem) -> Result<QuadraticRoots> {
    let xx = sys.xi.norm_squared();
    let a = xx - 1.0;
    let b_half = sys.xi.dot(sys.eta);
    let c_coef = sys.eta.norm_squared();
    let mut discriminant = b_half * b_half - a * c_coef;

    let mut out = QuadraticRoots {
        a,
        b_half,
        c_coef,
        discriminant,
        roots: Vec::new(),
        linear_fallback: false,
    };

    let raw: Vec<f64> = if a.abs() < EPS_LIN * (xx + 1.0) {
        out.linear_fallback = true;
        if b_half == 0.0 {
            return Err(Error::DegenerateLinear);
        }
        vec![c_coef / (2.0 * b_half)]
    } else {
        if discriminant < 0.0 {
            if discriminant >= -EPS_DISC * b_half * b_half {
                discriminant = 0.0;
                out.discriminant = 0.0;
            } else {
                return Err(Error::NoRealSolution { discriminant });
            }
        }
        // larger-magnitude root from the sign-matched numerator, the other from Vieta
        let q = b_half + b_half.signum() * discriminant.sqrt();
        if q == 0.0 {
            vec![0.0]
        } else {
            let big = q / a;
            let small = c_coef / q;
            if big == small {
                vec![big]
            } else {
                vec![big, small]
            }
        }
    };

    let floor = EPS_RHO * sys.baseline;
    let mut roots: Vec<f64> = raw
        .into_iter()
        .filter(|&r| r >= -floor)
        .map(|r| r.max(0.0))
        // rho_1 = 0 puts the source on the reference sensor
        .filter(|&r| r > 0.0)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    out.roots = roots;
    Ok(out)
}

/// Maps each root to an absolute position `rho_1 xi - eta + origin`.
pub fn candidate_positions(
    sys: &FourSensorSystem,
    roots: &QuadraticRoots,
    origin: Vec3,
) -> Vec<(f64, Vec3)> {
    roots
        .roots
        .iter()
        .map(|&rho| (rho, unreference(rho * sys.xi - sys.eta, origin)))
        .collect()
}

/// Scores each candidate by TDOA residual and keeps the smallest.
///
/// Equal residuals (within `EPS_TIE * L^2`) keep the first candidate and set
/// the `ambiguous` flag.
pub fn resolve_ambiguity(
    candidates: &[(f64, Vec3)],
    rel: &ReferencedArray,
    d: &RangeDifferences,
    sys: &FourSensorSystem,
    linear_fallback: bool,
) -> Result<LocalizationResult> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let scored: Vec<Candidate> = candidates
        .iter()
        .map(|&(rho1, position)| Candidate {
            rho1,
            position,
            residual: tdoa_residual(rel, d, position - rel.origin),
        })
        .collect();

    let (selected, resolved_by, ambiguous) = match scored.as_slice() {
        [_] => (0, AmbiguityResolution::SingleRoot, false),
        [first, second, ..] => {
            let tie = EPS_TIE * sys.baseline * sys.baseline;
            if (first.residual - second.residual).abs() <= tie {
                (0, AmbiguityResolution::Residual, true)
            } else if second.residual < first.residual {
                (1, AmbiguityResolution::Residual, false)
            } else {
                (0, AmbiguityResolution::Residual, false)
            }
        }
        [] => unreachable!(),
    };

    Ok(LocalizationResult {
        position: scored[selected].position,
        method: Method::FourSensor,
        candidates: scored,
        selected,
        ambiguity_resolved_by: resolved_by,
        ambiguous,
        diagnostics: Diagnostics {
            pivots: sys.pivots,
            pairings: None,
            scaled_rows: None,
            linear_fallback,
        },
    })
}

/// Locates the source from four sensors.
pub fn solve_4(sensors: &SensorArray, d: &RangeDifferences) -> Result<LocalizationResult> {
    d.check_against(sensors)?;
    let rel = reference_frame(sensors);
    let sys = build_system_4(&rel, d)?;
    let roots = solve_rho1(&sys)?;
    let candidates = candidate_positions(&sys, &roots, rel.origin);
    resolve_ambiguity(&candidates, &rel, d, &sys, roots.linear_fallback)
}
