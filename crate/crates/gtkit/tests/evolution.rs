use gtkit::evolution::{duhamel_residual, evolve, step, SolverParams};
use gtkit::initial_data::{gaussian_data, GaussianParams};
use gtkit::nonlinearity::GTConfig;
use gtkit::spectral::{make_grid, Field, Grid};
use gtkit::{Complex64, GtError};
use std::f64::consts::PI;

fn plane_wave(grid: &Grid, a: f64, k: f64) -> Field {
    Field::from_fn(grid, |x| Complex64::from_polar(a, k * x[0]))
}

// u(t) = a e^{i k x} e^{i (|a|^p - gamma k^2) t}
fn plane_wave_exact(grid: &Grid, a: f64, k: f64, p: u32, gamma: f64, t: f64) -> Field {
    let w = a.powi(p as i32) - gamma * k * k;
    Field::from_fn(grid, |x| Complex64::from_polar(a, k * x[0] + w * t))
}

#[test]
fn plane_wave_single_step_is_fifth_order() {
    let grid = make_grid(1, &[16], &[2.0 * PI]).unwrap();
    let cfg = GTConfig::new(&grid, 2, 1.0).unwrap();
    let u0 = plane_wave(&grid, 0.8, 3.0);
    let mut errs = Vec::new();
    for dt in [0.02, 0.01] {
        let u1 = step(&u0, 0.0, dt, &cfg).unwrap();
        let exact = plane_wave_exact(&grid, 0.8, 3.0, 2, 1.0, dt);
        errs.push(u1.l2_distance(&exact).unwrap());
    }
    assert!(errs[0] < 1e-9, "{errs:?}");
    let ratio = errs[0] / errs[1];
    assert!(ratio > 24.0 && ratio < 40.0, "local error ratio {ratio}");
}

#[test]
fn plane_wave_over_unit_time() {
    let grid = make_grid(1, &[16], &[2.0 * PI]).unwrap();
    let cfg = GTConfig::new(&grid, 4, -1.0).unwrap();
    let u0 = plane_wave(&grid, 0.9, 2.0);
    let traj = evolve(&u0, &SolverParams::new(0.01, 1.0), &cfg).unwrap();
    let exact = plane_wave_exact(&grid, 0.9, 2.0, 4, -1.0, 1.0);
    let err = traj.final_state().l2_distance(&exact).unwrap() / exact.l2_norm();
    assert!(err <= 1e-8, "phase error {err}");
    assert!(duhamel_residual(&traj, &cfg).unwrap() <= 1e-8);
}

#[test]
fn zero_field_is_fixed() {
    let grid = make_grid(1, &[32], &[10.0]).unwrap();
    let cfg = GTConfig::new(&grid, 2, 1.0).unwrap();
    let z = Field::zeros(&grid);
    assert_eq!(step(&z, 0.0, 0.05, &cfg).unwrap(), z);
}

#[test]
fn oversized_step_is_rejected_with_bound() {
    let grid = make_grid(1, &[16], &[2.0 * PI]).unwrap();
    let cfg = GTConfig::new(&grid, 2, 1.0).unwrap();
    let u0 = plane_wave(&grid, 3.0, 1.0);
    match step(&u0, 0.0, 0.05, &cfg) {
        Err(GtError::StepRejected { required, .. }) => assert!((required - 0.01).abs() < 1e-12),
        other => panic!("expected rejection, got {other:?}"),
    }
}

fn gaussian_setup() -> (Grid, GTConfig, Field) {
    let grid = make_grid(1, &[256], &[48.0]).unwrap();
    let cfg = GTConfig::new(&grid, 2, 1.0).unwrap();
    let u0 = gaussian_data(&grid, &GaussianParams { a: 1.0, sigma: 1.0 }).unwrap();
    (grid, cfg, u0)
}

#[test]
fn halving_dt_gives_fourth_order() {
    let (_, cfg, u0) = gaussian_setup();
    let run = |dt: f64| {
        let mut p = SolverParams::new(dt, 0.5);
        p.record = false;
        evolve(&u0, &p, &cfg).unwrap().final_state().clone()
    };
    let r = run(0.00625);
    let e1 = run(0.05).l2_distance(&r).unwrap();
    let e2 = run(0.025).l2_distance(&r).unwrap();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "convergence ratio {ratio}");
}

#[test]
fn conservation_and_reversibility() {
    let (_, cfg, u0) = gaussian_setup();
    let fwd = evolve(&u0, &SolverParams::new(0.01, 1.0), &cfg).unwrap();
    let r0 = &fwd.records[0];
    for r in &fwd.records {
        assert!((r.mass - r0.mass).abs() / r0.mass <= 1e-8);
        assert!((r.energy - r0.energy).abs() / r0.energy.abs() <= 1e-6, "{} vs {}", r.energy, r0.energy);
    }
    // Backward from u(1) with matched steps.
    let back_params = SolverParams::new(-0.01, -1.0);
    let back = evolve(fwd.final_state(), &back_params, &cfg).unwrap();
    assert!(back.final_state().l2_distance(&u0).unwrap() <= 1e-7);
    assert!(back.times.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn linear_flow_has_nonzero_residual() {
    let (_, cfg, u0) = gaussian_setup();
    let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.05).collect();
    let snaps = times
        .iter()
        .map(|&t| gtkit::spectral::free_propagate(&u0, t, cfg.gamma))
        .collect();
    let traj = gtkit::evolution::Trajectory {
        times,
        snapshots: snaps,
        records: vec![],
        blowup_suspected: false,
        steps_accepted: 0,
        steps_rejected: 0,
        dt: 0.05,
    };
    assert!(duhamel_residual(&traj, &cfg).unwrap() > 0.1);
}

#[test]
fn mismatched_signs_are_rejected() {
    let (_, cfg, u0) = gaussian_setup();
    assert!(matches!(
        evolve(&u0, &SolverParams::new(0.01, -1.0), &cfg),
        Err(GtError::Config(_))
    ));
}
