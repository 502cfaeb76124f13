//! Noise-free Monte Carlo experiments over random sensor/source geometries.
//!
//! Sensors are drawn uniformly from the unit cube centred on the origin and
//! the source from the same cube shrunk by `source_scale`. An instance
//! succeeds at threshold `T` when `|estimate - truth| / |truth| < T`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::Vec3;
use crate::localization::{locate, LocalizationResult};
use crate::measurement::{range_differences, Scenario, SensorArray};

/// Resampling budget for scenarios that violate the array/scenario invariants.
pub const MAX_SAMPLING_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_instances: usize,
    pub n_sensors: usize,
    pub thresholds: Vec<f64>,
    pub seed: u64,
    /// Source scales to sweep; a single-scale experiment is a one-point grid.
    pub scale_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_instances: 1000,
            n_sensors: 5,
            thresholds: vec![1e-6, 1e-3],
            seed: 0,
            scale_grid: log_grid(1e-6, 1.0, 13),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::InvalidConfig(
                "instance count must be at least 1".into(),
            ));
        }
        if !(4..=5).contains(&self.n_sensors) {
            return Err(Error::InvalidConfig(format!(
                "sensor count must be 4 or 5, got {}",
                self.n_sensors
            )));
        }
        if self.thresholds.is_empty() || self.scale_grid.is_empty() {
            return Err(Error::InvalidConfig(
                "need at least one threshold and one scale".into(),
            ));
        }
        if let Some(t) = self
            .thresholds
            .iter()
            .find(|t| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "threshold must be positive, got {t}"
            )));
        }
        if let Some(s) = self
            .scale_grid
            .iter()
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "source scale must be positive, got {s}"
            )));
        }
        Ok(())
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| match i {
                    0 => lo,
                    i if i == count - 1 => hi,
                    i => 10f64.powf(a + step * i as f64),
                })
                .collect()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one instance, independent of evaluation order.
pub fn instance_seed(seed: u64, scale_index: usize, instance_index: usize) -> u64 {
    let h = splitmix64(seed);
    let h = splitmix64(h ^ scale_index as u64);
    splitmix64(h ^ (instance_index as u64).rotate_left(32))
}

fn centered_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    Vec3::new(
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
    )
}

/// Draws a scenario: sensors ~ U(0,1)^3 - 0.5, source ~ scale * (U(0,1)^3 - 0.5).
pub fn sample_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    n_sensors: usize,
    source_scale: f64,
) -> Result<Scenario> {
    if !(4..=5).contains(&n_sensors) {
        return Err(Error::InvalidConfig(format!(
            "sensor count must be 4 or 5, got {n_sensors}"
        )));
    }
    if !(source_scale.is_finite() && source_scale > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "source scale must be positive, got {source_scale}"
        )));
    }
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let sensors: Vec<Vec3> = (0..n_sensors).map(|_| centered_unit(rng)).collect();
        let source = source_scale * centered_unit(rng);
        let scenario = SensorArray::new(sensors).and_then(|s| Scenario::new(s, source));
        if let Ok(s) = scenario {
            return Ok(s);
        }
    }
    Err(Error::DegenerateSampling {
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureCause {
    /// The solver rejected the geometry as rank deficient.
    SingularGeometry,
    /// Four-sensor only: the rejected candidate was the truth.
    WrongRoot,
    /// Anything else: precision loss, inconsistent quadratic, no admissible root.
    NumericalError,
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub scenario: Scenario,
    pub estimate: Result<LocalizationResult>,
    pub rel_error: Option<f64>,
    /// Smallest relative error among the rejected candidates, if any.
    pub rejected_rel_error: Option<f64>,
    /// One flag per threshold, in the order given.
    pub success_at: Vec<bool>,
    /// Why the instance failed at its failing thresholds; `None` when it
    /// succeeded at all of them.
    pub failure_cause: Option<FailureCause>,
}

/// Localizes one scenario from its noise-free range differences and grades it.
pub fn run_instance(scenario: &Scenario, thresholds: &[f64]) -> InstanceResult {
    let d = range_differences(scenario);
    let estimate = locate(&scenario.sensors, &d);
    let truth = scenario.source;
    let truth_norm = truth.norm();
    let rel = |p: Vec3| (p - truth).norm() / truth_norm;

    let (rel_error, rejected_rel_error) = match &estimate {
        Ok(r) => (
            Some(rel(r.position)),
            r.rejected().map(|c| rel(c.position)).min_by(f64::total_cmp),
        ),
        Err(_) => (None, None),
    };
    let success_at: Vec<bool> = thresholds
        .iter()
        .map(|&t| rel_error.is_some_and(|e| e < t))
        .collect();

    let tightest = thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    let failure_cause = if success_at.iter().all(|&s| s) {
        None
    } else {
        Some(match &estimate {
            Err(Error::SingularMatrix { .. } | Error::DegenerateDeltas { .. }) => {
                FailureCause::SingularGeometry
            }
            Err(_) => FailureCause::NumericalError,
            Ok(_) if rejected_rel_error.is_some_and(|e| e < tightest) => FailureCause::WrongRoot,
            Ok(_) => FailureCause::NumericalError,
        })
    };

    InstanceResult {
        scenario: scenario.clone(),
        estimate,
        rel_error,
        rejected_rel_error,
        success_at,
        failure_cause,
    }
}

/// Aggregated outcome for one (source scale, threshold) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n_sensors: usize,
    pub source_scale: f64,
    pub threshold: f64,
    pub success_fraction: f64,
    pub n_singular: usize,
    pub n_wrong_root: usize,
    pub n_numerical: usize,
    pub n_instances: usize,
}

impl SweepCell {
    pub fn n_success(&self) -> usize {
        self.n_instances - self.n_singular - self.n_wrong_root - self.n_numerical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Scale-major, threshold-minor.
    pub cells: Vec<SweepCell>,
}

impl SweepSummary {
    pub fn cell(&self, source_scale: f64, threshold: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.source_scale == source_scale && c.threshold == threshold)
    }
}

/// Runs every instance for one grid point, in instance order.
pub fn run_scale(config: &ExperimentConfig, scale_index: usize) -> Result<Vec<InstanceResult>> {
    let scale = config.scale_grid[scale_index];
    (0..config.n_instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(config.seed, scale_index, i));
            let scenario = sample_scenario(&mut rng, config.n_sensors, scale)?;
            Ok(run_instance(&scenario, &config.thresholds))
        })
        .collect()
}

fn summarize(
    config: &ExperimentConfig,
    scale: f64,
    instances: &[InstanceResult],
) -> Vec<SweepCell> {
    config
        .thresholds
        .iter()
        .enumerate()
        .map(|(ti, &threshold)| {
            let mut cell = SweepCell {
                n_sensors: config.n_sensors,
                source_scale: scale,
                threshold,
                success_fraction: 0.0,
                n_singular: 0,
                n_wrong_root: 0,
                n_numerical: 0,
                n_instances: instances.len(),
            };
            for inst in instances.iter().filter(|inst| !inst.success_at[ti]) {
                match inst.failure_cause {
                    Some(FailureCause::SingularGeometry) => cell.n_singular += 1,
                    Some(FailureCause::WrongRoot) => cell.n_wrong_root += 1,
                    Some(FailureCause::NumericalError) | None => cell.n_numerical += 1,
                }
            }
            cell.success_fraction = cell.n_success() as f64 / cell.n_instances as f64;
            cell
        })
        .collect()
}

/// Runs the full sweep on the global rayon pool.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepSummary> {
    config.validate()?;
    let mut cells = Vec::with_capacity(config.scale_grid.len() * config.thresholds.len());
    for (si, &scale) in config.scale_grid.iter().enumerate() {
        let instances = run_scale(config, si)?;
        cells.extend(summarize(config, scale, &instances));
    }
    Ok(SweepSummary { cells })
}

/// Runs the sweep on a dedicated pool with `threads` workers.
pub fn run_sweep_with_threads(config: &ExperimentConfig, threads: usize) -> Result<SweepSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(config))
}
