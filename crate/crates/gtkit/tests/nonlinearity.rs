use gtkit::error::GtError;
use gtkit::nonlinearity::*;
use gtkit::spectral::{make_grid, Field, Grid};
use gtkit::Complex64;
use std::f64::consts::PI;

fn rel(a: &Field, b: &Field) -> f64 {
    a.l2_distance(b).unwrap() / b.l2_norm()
}

fn plane(a: f64, k: f64) -> (Grid, Field) {
    let grid = make_grid(1, &[32], &[2.0 * PI]).unwrap();
    let u = Field::from_fn(&grid, |x| Complex64::from_polar(a, k * x[0]));
    (grid, u)
}

fn gaussian(grid: &Grid, a: f64, sigma: f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(a * (-(x[0] * x[0]) / (4.0 * sigma * sigma)).exp(), 0.0))
}

#[test]
fn default_rule_is_a_probability_measure() {
    let grid = make_grid(1, &[128], &[20.0]).unwrap();
    let q = SigmaQuadrature::for_grid(&grid, Variant::AveragedUnit, 1.0, 1).unwrap();
    assert!(q.nodes.windows(2).all(|w| w[1] > w[0]));
    assert!(q.nodes[0] >= 0.0 && *q.nodes.last().unwrap() <= 1.0);
    assert!(q.weights.iter().all(|&w| w >= 0.0));
    assert!((q.total_weight() - 1.0).abs() <= 1e-12);
    let panels = (grid.xi_max_sq() / PI).ceil() as usize;
    assert_eq!(q.len(), (4 * panels).max(8));
    assert_eq!(SigmaQuadrature::required_nodes(&grid, 1.0), q.len());
}

#[test]
fn coarse_grids_still_get_eight_nodes() {
    let grid = make_grid(1, &[8], &[2.0 * PI]).unwrap();
    assert!(SigmaQuadrature::required_nodes(&grid, 1.0) >= 8);
}

#[test]
fn integrated_variant_carries_the_interval_length() {
    let grid = make_grid(1, &[32], &[20.0]).unwrap();
    let q = SigmaQuadrature::for_grid(&grid, Variant::IntegratedInterval, 4.0, 1).unwrap();
    assert!((q.total_weight() - 4.0).abs() < 1e-12);
    assert!(*q.nodes.last().unwrap() <= 4.0);
}

#[test]
fn custom_tables_are_checked_for_order_and_sign() {
    assert!(SigmaQuadrature::custom(vec![0.2, 0.7], vec![0.5, 0.5], 1.0).is_ok());
    assert!(SigmaQuadrature::custom(vec![0.7, 0.2], vec![0.5, 0.5], 1.0).is_err());
    assert!(SigmaQuadrature::custom(vec![0.2, 1.5], vec![0.5, 0.5], 1.0).is_err());
    assert!(SigmaQuadrature::custom(vec![0.2, 0.7], vec![0.5, -0.5], 1.0).is_err());
    assert!(SigmaQuadrature::custom(vec![0.2], vec![0.5, 0.5], 1.0).is_err());
}

#[test]
fn config_invariants() {
    let grid = make_grid(1, &[32], &[20.0]).unwrap();
    for p in [0, 1, 3, 5] {
        let err = GTConfig::new(&grid, p, 1.0).unwrap_err();
        assert!(err.to_string().contains("p must be even ≥ 2"), "{err}");
    }
    let err = GTConfig::new(&grid, 2, 0.0).unwrap_err();
    assert!(err.to_string().contains("nonzero net dispersion"), "{err}");
    assert!(GTConfig::with_variant(&grid, 2, 1.0, Variant::AveragedUnit, 2.0).is_err());
}

#[test]
fn undersized_rule_names_the_required_count() {
    let grid = make_grid(1, &[128], &[10.0]).unwrap();
    let mut cfg = GTConfig::new(&grid, 2, -1.0).unwrap();
    let need = cfg.sigma_quad.len();
    cfg.sigma_quad = SigmaQuadrature::composite(1.0, 2, 1.0).unwrap();
    let u = gaussian(&grid, 1.0, 1.0);
    match gt_nonlinearity(&u, &cfg) {
        Err(GtError::QuadratureResolution { required, have }) => {
            assert_eq!(required, need);
            assert_eq!(have, 8);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_field_maps_to_zero() {
    let grid = make_grid(1, &[64], &[20.0]).unwrap();
    let cfg = GTConfig::new(&grid, 4, 1.0).unwrap();
    let z = Field::zeros(&grid);
    assert_eq!(gt_nonlinearity(&z, &cfg).unwrap().max_abs(), 0.0);
    assert_eq!(potential_energy(&z, &cfg).unwrap(), 0.0);
    assert_eq!(energy(&z, &cfg).unwrap(), 0.0);
    assert_eq!(mass(&z), 0.0);
}

#[test]
fn plane_waves_have_closed_forms() {
    for p in [2, 4, 8] {
        let (a, k) = (0.7, 3.0);
        let (grid, u) = plane(a, k);
        let l = 2.0 * PI;
        let cfg = GTConfig::new(&grid, p, -1.0).unwrap();
        let n = gt_nonlinearity(&u, &cfg).unwrap();
        let exact = u.scale(Complex64::from(a.powi(p as i32)));
        assert!(rel(&n, &exact) < 1e-12, "p = {p}");
        let pf = p as f64;
        let pot = a.powf(pf + 2.0) * l / (pf + 2.0);
        assert!((potential_energy(&u, &cfg).unwrap() / pot - 1.0).abs() < 1e-12);
        let e = k * k * a * a / 2.0 * l + pot;
        assert!((energy(&u, &cfg).unwrap() / e - 1.0).abs() < 1e-12);
        assert!((mass(&u) / (a * a * l) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_modes_match_refined_quadrature() {
    let grid = make_grid(1, &[64], &[2.0 * PI]).unwrap();
    let u = Field::from_fn(&grid, |x| {
        Complex64::from_polar(0.8, 2.0 * x[0]) + Complex64::from_polar(0.5, -7.0 * x[0] + 0.3)
    });
    for gamma in [1.0, -1.0] {
        let cfg = GTConfig::new(&grid, 2, gamma).unwrap();
        let fine = cfg.refined(&grid, 10).unwrap();
        let coarse = gt_nonlinearity(&u, &cfg).unwrap();
        let reference = gt_nonlinearity(&u, &fine).unwrap();
        assert!(rel(&coarse, &reference) <= 1e-8);
    }
}

#[test]
fn gaussian_energy_matches_independent_terms() {
    let grid = make_grid(1, &[256], &[48.0]).unwrap();
    let (a, sigma) = (1.3, 1.1);
    let u = gaussian(&grid, a, sigma);
    let cfg = GTConfig::new(&grid, 2, -1.0).unwrap();
    let fine = cfg.refined(&grid, 10).unwrap();
    let pot = potential_energy(&u, &cfg).unwrap();
    let pot_ref = potential_energy(&u, &fine).unwrap();
    assert!((pot / pot_ref - 1.0).abs() <= 1e-8);
    // ||u||^2_{H^1 dot} = A^2 sqrt(2 pi) / (4 sigma)
    let kinetic = a * a * (2.0 * PI).sqrt() / (4.0 * sigma);
    let e = energy(&u, &cfg).unwrap();
    assert!((e / (kinetic / 2.0 + pot_ref) - 1.0).abs() <= 1e-8);
    assert!(e >= 0.0);
    assert!((mass(&u) / (a * a * sigma * (2.0 * PI).sqrt()) - 1.0).abs() < 1e-8);
}

#[test]
fn unit_interval_variants_coincide() {
    let grid = make_grid(1, &[64], &[16.0]).unwrap();
    let u = gaussian(&grid, 1.0, 1.0);
    let unit = GTConfig::new(&grid, 4, 1.0).unwrap();
    let interval = GTConfig::with_variant(&grid, 4, 1.0, Variant::AveragedInterval, 1.0).unwrap();
    let integrated = GTConfig::with_variant(&grid, 4, 1.0, Variant::IntegratedInterval, 1.0).unwrap();
    let a = gt_nonlinearity(&u, &unit).unwrap();
    assert!(rel(&gt_nonlinearity(&u, &interval).unwrap(), &a) <= 1e-12);
    assert!(rel(&gt_nonlinearity(&u, &integrated).unwrap(), &a) <= 1e-12);
}

#[test]
fn translation_by_whole_cells_commutes() {
    let grid = make_grid(1, &[64], &[16.0]).unwrap();
    let u = Field::from_fn(&grid, |x| {
        Complex64::new((-(x[0] - 1.0).powi(2)).exp(), 0.5 * (-(x[0] + 2.0).powi(2)).exp())
    });
    let roll = |f: &Field, m: usize| {
        let mut v = f.values().to_vec();
        v.rotate_right(m);
        Field::new(grid.clone(), v).unwrap()
    };
    let cfg = GTConfig::new(&grid, 2, 1.0).unwrap();
    let lhs = gt_nonlinearity(&roll(&u, 5), &cfg).unwrap();
    let rhs = roll(&gt_nonlinearity(&u, &cfg).unwrap(), 5);
    assert!(rel(&lhs, &rhs) < 1e-12);
}

#[test]
fn averaged_sigma_interval_is_a_scaled_integrated_one() {
    let grid = make_grid(1, &[64], &[16.0]).unwrap();
    let u = gaussian(&grid, 1.0, 1.0);
    let avg = GTConfig::with_variant(&grid, 2, 1.0, Variant::AveragedInterval, 4.0).unwrap();
    let int = GTConfig::with_variant(&grid, 2, 1.0, Variant::IntegratedInterval, 4.0).unwrap();
    let a = gt_nonlinearity(&u, &avg).unwrap().scale(Complex64::from(4.0));
    assert!(rel(&a, &gt_nonlinearity(&u, &int).unwrap()) < 1e-12);
}
