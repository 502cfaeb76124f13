//! TOML scenario documents.
//!
//! ```toml
//! sensors = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
//! source = [2.0, 3.0, 4.0]   # or: deltas = [...] (m), or: times = [...] (s)
//! c = 299792458.0            # optional, m/s; only used with `times`
//! ```
//!
//! Exactly one of `source`, `deltas` or `times` must be present. Positions and
//! range differences are in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::Vec3;
use crate::measurement::{
    range_differences, times_to_range_differences, RangeDifferences, Scenario, SensorArray,
    SPEED_OF_LIGHT,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub sensors: Vec<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Absolute arrival times, seconds, one per sensor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// Solver input resolved from a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LocateInput {
    pub sensors: SensorArray,
    pub deltas: RangeDifferences,
    /// Truth source, when the file carried one.
    pub truth: Option<Vec3>,
}

impl ScenarioFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        Self {
            sensors: scenario.sensors.positions().to_vec(),
            source: Some(scenario.source),
            ..Self::default()
        }
    }

    /// Validates the document and derives range differences if needed.
    pub fn into_input(self) -> Result<LocateInput> {
        let given = [
            self.source.is_some(),
            self.deltas.is_some(),
            self.times.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(Error::Parse(
                "exactly one of `source`, `deltas` or `times` must be given".into(),
            ));
        }
        let sensors = SensorArray::new(self.sensors).map_err(|e| Error::Parse(e.to_string()))?;
        let n = sensors.len();

        let (deltas, truth) = if let Some(source) = self.source {
            let scenario =
                Scenario::new(sensors.clone(), source).map_err(|e| Error::Parse(e.to_string()))?;
            (range_differences(&scenario), Some(source))
        } else if let Some(deltas) = self.deltas {
            (
                RangeDifferences::new(deltas, n).map_err(|e| Error::Parse(e.to_string()))?,
                None,
            )
        } else {
            let times = self.times.unwrap_or_default();
            if times.len() != n {
                return Err(Error::Parse(format!(
                    "{} arrival times given for {} sensors",
                    times.len(),
                    n
                )));
            }
            let c = self.c.unwrap_or(SPEED_OF_LIGHT);
            (
                times_to_range_differences(&times, c).map_err(|e| Error::Parse(e.to_string()))?,
                None,
            )
        };
        Ok(LocateInput {
            sensors,
            deltas,
            truth,
        })
    }
}
