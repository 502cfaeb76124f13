//! CSV interchange for sweep summaries.
//!
//! Header: `n_sensors,source_scale,threshold,success_fraction,n_singular,n_wrong_root,n_numerical,n_instances`.
//! Floats are written in shortest round-trip form, so parsing the CSV back
//! recovers every field exactly.

use tdoa_core::{SweepCell, SweepSummary};

pub const CSV_HEADER: &str =
    "n_sensors,source_scale,threshold,success_fraction,n_singular,n_wrong_root,n_numerical,n_instances";

pub fn to_csv(summary: &SweepSummary) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for cell in &summary.cells {
        w.serialize(cell)?;
    }
    if summary.cells.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

pub fn from_csv(text: &str) -> csv::Result<SweepSummary> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let cells = r
        .deserialize::<SweepCell>()
        .collect::<csv::Result<Vec<_>>>()?;
    Ok(SweepSummary { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tdoa_core::montecarlo::{run_sweep, ExperimentConfig};

    #[test]
    fn header_is_fixed() {
        let cfg = ExperimentConfig {
            n_instances: 3,
            scale_grid: vec![0.1],
            ..ExperimentConfig::default()
        };
        let csv = to_csv(&run_sweep(&cfg).unwrap()).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(
            to_csv(&SweepSummary { cells: vec![] }).unwrap().trim(),
            CSV_HEADER
        );
    }

    #[test]
    fn csv_round_trips_losslessly() {
        let cfg = ExperimentConfig {
            n_instances: 37,
            n_sensors: 4,
            scale_grid: tdoa_core::montecarlo::log_grid(1e-6, 1.0, 5),
            thresholds: vec![1e-6, 1e-3],
            seed: 17,
        };
        let summary = run_sweep(&cfg).unwrap();
        assert_eq!(from_csv(&to_csv(&summary).unwrap()).unwrap(), summary);
    }
}
