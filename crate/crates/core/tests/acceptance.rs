//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdoa_core::montecarlo::{
    run_scale, run_sweep, run_sweep_with_threads, sample_scenario, ExperimentConfig, FailureCause,
};
use tdoa_core::solver4::{build_system_4, candidate_positions, solve_rho1};
use tdoa_core::solver5::{cleared_row, literal_row, DEFAULT_PAIRINGS};
use tdoa_core::{
    range_differences, reference_frame, solve3, solve_4, solve_5, Error, Mat3, Scenario,
    SensorArray, Vec3,
};

const SEED: u64 = 42;
const RUNTIME_BUDGET: Duration = Duration::from_secs(5);
const PROPERTY_CASES: usize = 500;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn protocol(n_sensors: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_instances: 1000,
        n_sensors,
        thresholds: vec![1e-6, 1e-3],
        seed: SEED,
        ..ExperimentConfig::default()
    }
}

fn criterion_1() -> Outcome {
    let cfg = protocol(5);
    let start = Instant::now();
    let summary = run_sweep(&cfg).expect("valid config");
    let elapsed = start.elapsed();
    let worst = cfg
        .scale_grid
        .iter()
        .map(|&s| summary.cell(s, 1e-6).unwrap())
        .min_by(|a, b| a.success_fraction.total_cmp(&b.success_fraction))
        .unwrap();
    outcome(
        worst.success_fraction >= 0.99 && elapsed < RUNTIME_BUDGET,
        format!(
            "5-sensor, T=1e-6, 13 scales x 1000: worst success {} at scale {:e}; {:.2?}",
            worst.success_fraction, worst.source_scale, elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let cfg = protocol(4);
    let start = Instant::now();
    let summary = run_sweep(&cfg).expect("valid config");
    let elapsed = start.elapsed();
    let fractions: Vec<f64> = cfg
        .scale_grid
        .iter()
        .map(|&s| summary.cell(s, 1e-3).unwrap().success_fraction)
        .collect();
    let worst = fractions.iter().copied().fold(f64::INFINITY, f64::min);

    let unit_scale = cfg.scale_grid.iter().position(|&s| s == 1.0).unwrap();
    let instances = run_scale(&cfg, unit_scale).expect("sampling");
    let failures: Vec<_> = instances.iter().filter(|i| !i.success_at[1]).collect();
    let attributed = failures
        .iter()
        .filter(|i| {
            i.failure_cause == Some(FailureCause::WrongRoot)
                && i.rejected_rel_error.is_some_and(|e| e < 1e-6)
        })
        .count();

    outcome(
        worst >= 0.95 && attributed == failures.len() && elapsed < RUNTIME_BUDGET,
        format!(
            "4-sensor, T=1e-3: worst success {worst} (per scale {fractions:?}); \
             scale 1: {attributed}/{} failures are wrong-root with truth rejected; {elapsed:.2?}",
            failures.len()
        ),
    )
}

fn canonical(n: usize) -> Scenario {
    let mut p = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 1.0, 1.0),
    ];
    p.truncate(n);
    Scenario::new(SensorArray::new(p).unwrap(), Vec3::new(2.0, 3.0, 4.0)).unwrap()
}

fn criterion_3() -> Outcome {
    let s5 = canonical(5);
    let s4 = canonical(4);
    let e5 = solve_5(&s5.sensors, &range_differences(&s5))
        .map(|r| (r.position - s5.source).norm() / s5.source.norm());
    let e4 = solve_4(&s4.sensors, &range_differences(&s4))
        .map(|r| (r.position - s4.source).norm() / s4.source.norm());
    let ok = matches!((&e5, &e4), (Ok(a), Ok(b)) if *a < 1e-9 && *b < 1e-9);
    outcome(
        ok,
        format!("canonical (2,3,4): 5-sensor rel err {e5:?}, 4-sensor rel err {e4:?}"),
    )
}

fn random_rotation<R: Rng>(rng: &mut R) -> Mat3 {
    // unit quaternion from three uniforms
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
        b * (tau * u3).cos(),
    );
    Mat3::from_rows(
        Vec3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ),
        Vec3::new(
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ),
        Vec3::new(
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ),
    )
}

fn moved(s: &Scenario, rot: &Mat3, shift: Vec3) -> Scenario {
    let f = |p: Vec3| rot.mul_vec(p) + shift;
    let sensors = SensorArray::new(s.sensors.positions().iter().map(|&p| f(p)).collect()).unwrap();
    Scenario::new(sensors, f(s.source)).unwrap()
}

/// Property checks over `PROPERTY_CASES` draws each; returns failing-case counts.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = [0usize; 6];

    // (a) row-form equivalence
    for _ in 0..PROPERTY_CASES {
        let s = sample_scenario(&mut rng, 5, 1.0).unwrap();
        let rel = reference_frame(&s.sensors);
        let d = range_differences(&s);
        let rows = |cleared: bool| {
            let mut m = [Vec3::ZERO; 3];
            let mut x = [0.0; 3];
            for (i, &(k, j)) in DEFAULT_PAIRINGS.iter().enumerate() {
                (m[i], x[i]) = if cleared {
                    cleared_row(&rel, &d, k, j)
                } else {
                    literal_row(&rel, &d, k, j)
                };
            }
            solve3(&Mat3 { rows: m }, Vec3::from(x))
        };
        let ok = match (rows(false), rows(true)) {
            (Ok(a), Ok(b)) => (a - b).norm() <= 1e-9 * a.norm(),
            (Err(_), Err(_)) => true,
            _ => false,
        };
        failures[0] += usize::from(!ok);
    }

    // (b) root residual, (c) |candidate| = rho_1, (d) truth among candidates
    for _ in 0..PROPERTY_CASES {
        let scale = rng.random_range(0.01..3.0);
        let s = sample_scenario(&mut rng, 4, scale).unwrap();
        let rel = reference_frame(&s.sensors);
        let d = range_differences(&s);
        let Ok(sys) = build_system_4(&rel, &d) else {
            failures[3] += 1;
            continue;
        };
        let Ok(roots) = solve_rho1(&sys) else {
            failures[3] += 1;
            continue;
        };
        for &rho in &roots.roots {
            let bound = 1e-8 * (roots.a.abs() * rho * rho).max(roots.c_coef);
            failures[1] += usize::from(roots.eval(rho).abs() >= bound);
        }
        let cands = candidate_positions(&sys, &roots, rel.origin);
        for &(rho, p) in &cands {
            failures[2] += usize::from(((p - rel.origin).norm() - rho).abs() >= 1e-8 * rho);
        }
        let truth_found = cands
            .iter()
            .any(|&(_, p)| (p - s.source).norm() < 1e-6 * s.source.norm());
        failures[3] += usize::from(!truth_found);
    }

    // (e) rigid-motion equivariance
    for i in 0..PROPERTY_CASES {
        let n = if i % 2 == 0 { 5 } else { 4 };
        let s = sample_scenario(&mut rng, n, 1.0).unwrap();
        let rot = random_rotation(&mut rng);
        let shift = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let t = moved(&s, &rot, shift);
        let solve = |sc: &Scenario| tdoa_core::locate(&sc.sensors, &range_differences(sc));
        let ok = match (solve(&s), solve(&t)) {
            (Ok(a), Ok(b)) => {
                let expect = rot.mul_vec(a.position) + shift;
                (b.position - expect).norm() <= 1e-9 * t.source.norm().max(s.source.norm())
            }
            (Err(_), Err(_)) => true,
            _ => false,
        };
        failures[4] += usize::from(!ok);
    }

    // (f) sweep determinism across thread counts
    for n_sensors in [4, 5] {
        let cfg = ExperimentConfig {
            n_instances: PROPERTY_CASES,
            n_sensors,
            seed: SEED,
            scale_grid: vec![1e-6, 1e-3, 1.0],
            ..ExperimentConfig::default()
        };
        let reference = run_sweep_with_threads(&cfg, 1).unwrap();
        for threads in [2, 3, 8] {
            let other = run_sweep_with_threads(&cfg, threads).unwrap();
            failures[5] += usize::from(format!("{other:?}") != format!("{reference:?}"));
        }
    }

    outcome(
        failures.iter().all(|&f| f == 0),
        format!("property failures (a..f) = {failures:?} over {PROPERTY_CASES} cases each"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut u = || -> f64 { rng.random_range(-0.5..0.5) };
    let mut bisector_ok = 0;
    let mut singular_ok = 0;

    // 50 scenarios with delta_21 = 0: sensors 1 and 2 mirrored across x = 0, source on that plane
    for _ in 0..50 {
        let mirror = Vec3::new(u().abs() + 0.05, u(), u());
        let mut p = vec![mirror, Vec3::new(-mirror.x, mirror.y, mirror.z)];
        p.extend((0..3).map(|_| Vec3::new(u(), u(), u())));
        let s = Scenario::new(SensorArray::new(p).unwrap(), Vec3::new(0.0, u(), u())).unwrap();
        let d = range_differences(&s);
        let ok = d.delta(2) == 0.0
            && solve_5(&s.sensors, &d).is_ok_and(|r| {
                r.diagnostics.scaled_rows.is_some_and(|f| f[0])
                    && (r.position - s.source).norm() < 1e-6 * s.source.norm()
            });
        bisector_ok += usize::from(ok);
    }

    // 50 collinear arrays, alternating 5 and 4 sensors
    for i in 0..50 {
        let n = if i % 2 == 0 { 5 } else { 4 };
        let base = Vec3::new(u(), u(), u());
        let dir = Vec3::new(u(), u(), u());
        let dir = dir * (1.0 / dir.norm());
        let p = (0..n)
            .map(|k| base + (0.2 * k as f64 + 0.05) * dir)
            .collect();
        let off_line = base + Vec3::new(1.0, 1.0, 1.0).cross(dir) + 0.3 * dir;
        let s = Scenario::new(SensorArray::new(p).unwrap(), off_line).unwrap();
        let res = tdoa_core::locate(&s.sensors, &range_differences(&s));
        singular_ok += usize::from(matches!(res, Err(Error::SingularMatrix { .. })));
    }

    outcome(
        bisector_ok == 50 && singular_ok == 50,
        format!("delta_21 = 0 localized {bisector_ok}/50 via cleared row; collinear -> SingularMatrix {singular_ok}/50"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 5] = [
        ("1 five-sensor noise-free exactness", criterion_1),
        (
            "2 four-sensor success and wrong-root attribution",
            criterion_2,
        ),
        ("3 canonical round trip", criterion_3),
        ("4 property suite", criterion_4),
        ("5 degeneracy handling", criterion_5),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let o = run();
        all &= o.pass;
        println!(
            "[{}] criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
