//! Exact, closed-form TDOA source localization in three dimensions.
//!
//! With five sensors the source position is the solution of a single 3x3
//! linear system. With four sensors the position is linear in the range to
//! the reference sensor, which in turn solves a quadratic; the two roots are
//! disambiguated by how well each reproduces the measured range differences.
//!
//! [`montecarlo`] reproduces the noise-free success-fraction experiments over
//! randomly drawn geometries.

pub mod error;
pub mod geom3;
pub mod localization;
pub mod measurement;
pub mod montecarlo;
pub mod scenario_file;
pub mod solver4;
pub mod solver5;

pub use error::{Error, Result};
pub use geom3::{dot, norm, solve3, Mat3, PivotDiagnostics, Vec3};
pub use localization::{
    locate, AmbiguityResolution, Candidate, Diagnostics, LocalizationResult, Method,
};
pub use measurement::{
    range_differences, reference_frame, tdoa_to_range_diff, true_ranges, unreference,
    RangeDifferences, ReferencedArray, Scenario, SensorArray, SPEED_OF_LIGHT,
};
pub use montecarlo::{ExperimentConfig, FailureCause, InstanceResult, SweepCell, SweepSummary};
pub use scenario_file::ScenarioFile;
pub use solver4::solve_4;
pub use solver5::solve_5;
