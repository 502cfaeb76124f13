use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdoa_core::montecarlo::{
    run_scale, run_sweep, sample_scenario, ExperimentConfig, FailureCause,
};
use tdoa_core::{locate, range_differences, solve_4, solve_5, Scenario, SensorArray, Vec3};

fn scenario(seed: u64, n: usize, scale: f64) -> Scenario {
    sample_scenario(&mut ChaCha8Rng::seed_from_u64(seed), n, scale).unwrap()
}

fn scale_strategy() -> impl Strategy<Value = f64> {
    (-6.0f64..0.5).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn five_sensor_is_exact_on_conditioned_geometry(seed in any::<u64>(), scale in scale_strategy()) {
        let s = scenario(seed, 5, scale);
        let r = solve_5(&s.sensors, &range_differences(&s)).unwrap();
        prop_assume!(r.diagnostics.pivots.pivot_ratio > 1e-4);
        prop_assert!((r.position - s.source).norm() / s.source.norm() < 1e-6);
        prop_assert_eq!(r.candidates.len(), 1);
    }

    #[test]
    fn four_sensor_truth_candidate_has_negligible_residual(seed in any::<u64>(), scale in scale_strategy()) {
        let s = scenario(seed, 4, scale);
        let d = range_differences(&s);
        let r = solve_4(&s.sensors, &d).unwrap();
        prop_assume!(r.diagnostics.pivots.pivot_ratio > 1e-4);
        let truth = r
            .candidates
            .iter()
            .min_by(|a, b| (a.position - s.source).norm().total_cmp(&(b.position - s.source).norm()))
            .unwrap();
        let delta_scale = d.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(truth.residual < 1e-10 * delta_scale * delta_scale);
    }

    #[test]
    fn four_sensor_candidates_translate_with_the_scene(seed in any::<u64>(), shift in prop::array::uniform3(-2.0f64..2.0)) {
        let s = scenario(seed, 4, 1.0);
        let shift = Vec3::from(shift);
        let moved = Scenario::new(
            SensorArray::new(s.sensors.positions().iter().map(|&p| p + shift).collect()).unwrap(),
            s.source + shift,
        ).unwrap();
        let a = solve_4(&s.sensors, &range_differences(&s)).unwrap();
        let b = solve_4(&moved.sensors, &range_differences(&moved)).unwrap();
        prop_assume!(a.diagnostics.pivots.pivot_ratio > 1e-4);
        prop_assert_eq!(a.candidates.len(), b.candidates.len());
        for (ca, cb) in a.candidates.iter().zip(&b.candidates) {
            prop_assert!((cb.position - (ca.position + shift)).norm() < 1e-9 * (1.0 + ca.position.norm()));
        }
    }

    #[test]
    fn inconsistent_deltas_never_produce_a_position(seed in any::<u64>()) {
        let s = scenario(seed, 4, 1.0);
        let d = tdoa_core::RangeDifferences::new(vec![5.0, 0.0, 0.0], 4).unwrap();
        prop_assert!(locate(&s.sensors, &d).is_err());
    }
}

#[test]
fn sweep_accounting_and_threshold_monotonicity() {
    for n_sensors in [4, 5] {
        let cfg = ExperimentConfig {
            n_instances: 400,
            n_sensors,
            thresholds: vec![1e-9, 1e-6, 1e-3],
            seed: 9,
            scale_grid: vec![1e-5, 1e-2, 1.0],
        };
        let summary = run_sweep(&cfg).unwrap();
        assert_eq!(summary.cells.len(), 9);
        for c in &summary.cells {
            assert_eq!(
                c.n_success() + c.n_singular + c.n_wrong_root + c.n_numerical,
                c.n_instances
            );
            assert_eq!(
                c.success_fraction,
                c.n_success() as f64 / c.n_instances as f64
            );
        }
        for cells in summary.cells.chunks(3) {
            assert!(cells
                .windows(2)
                .all(|w| w[0].success_fraction <= w[1].success_fraction));
        }
        assert_eq!(summary, run_sweep(&cfg).unwrap());
    }
}

#[test]
fn wrong_root_classification_is_sound() {
    let cfg = ExperimentConfig {
        n_instances: 1000,
        n_sensors: 4,
        seed: 123,
        scale_grid: vec![1e-3, 1.0],
        ..ExperimentConfig::default()
    };
    let t_min = 1e-6;
    let mut seen = 0;
    for si in 0..cfg.scale_grid.len() {
        for inst in run_scale(&cfg, si).unwrap() {
            assert_eq!(inst.rel_error.is_some(), inst.estimate.is_ok());
            if inst.failure_cause == Some(FailureCause::WrongRoot) {
                seen += 1;
                assert!(inst.rejected_rel_error.unwrap() < t_min);
            }
        }
    }
    assert!(seen > 0);
}
