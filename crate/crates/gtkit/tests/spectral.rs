use gtkit::error::GtError;
use gtkit::spectral::*;
use gtkit::Complex64;
use std::f64::consts::PI;

fn rel(a: &Field, b: &Field) -> f64 {
    a.l2_distance(b).unwrap() / b.l2_norm()
}

fn gaussian(grid: &Grid, a: f64, sigma: f64, shift: f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(a * (-(x[0] - shift).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0))
}

fn mode(grid: &Grid, k: f64) -> Field {
    let amp = 1.0 / grid.l()[0].sqrt();
    Field::from_fn(grid, |x| Complex64::from_polar(amp, k * x[0]))
}

#[test]
fn lattice_examples() {
    let g = make_grid(1, &[8], &[2.0 * PI]).unwrap();
    let mut xi = g.xi(0);
    xi.sort_by(f64::total_cmp);
    let expect: Vec<f64> = (-4..4).map(f64::from).collect();
    for (a, b) in xi.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }
    let g = make_grid(1, &[16], &[PI]).unwrap();
    assert!((g.dxi(0) - 2.0).abs() < 1e-15);
    let g = make_grid(2, &[8, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
    assert_eq!(g.len(), 128);
    assert_eq!(g.xi(1).len(), 16);
}

#[test]
fn coordinates_are_centered() {
    let g = make_grid(1, &[64], &[10.0]).unwrap();
    let x = g.x(0);
    assert_eq!(x[0], -5.0);
    assert!((x[63] - (5.0 - g.dx(0))).abs() < 1e-14);
    assert_eq!(g.dx(0) * 64.0, 10.0);
}

#[test]
fn bad_grids_are_rejected() {
    for n in [12, 4, 7] {
        assert!(matches!(make_grid(1, &[n], &[1.0]), Err(GtError::Config(_))), "n = {n}");
    }
    assert!(make_grid(1, &[16], &[0.0]).is_err());
    assert!(make_grid(1, &[16], &[-1.0]).is_err());
    assert!(make_grid(2, &[16], &[1.0]).is_err());
}

#[test]
fn propagator_at_zero_time_is_identity() {
    let g = make_grid(1, &[64], &[20.0]).unwrap();
    let u = gaussian(&g, 1.0, 1.0, 0.7);
    assert!(rel(&free_propagate(&u, 0.0, 1.0), &u) < 1e-15);
}

#[test]
fn propagated_gaussian_matches_closed_form() {
    // e^{i tau Delta} e^{-x^2/4s^2} = (s^2/(s^2+i tau))^{1/2} e^{-x^2/4(s^2+i tau)}
    let g = make_grid(1, &[512], &[80.0]).unwrap();
    let s2 = 1.0;
    let u = gaussian(&g, 1.0, 1.0, 0.0);
    for tau in [0.5, -1.5, 3.0] {
        let z = Complex64::new(s2, tau);
        let pre = (Complex64::from(s2) / z).sqrt();
        let exact = Field::from_fn(&g, |x| pre * (-(x[0] * x[0]) / (4.0 * z)).exp());
        let err = rel(&free_propagate(&u, tau, 1.0), &exact);
        assert!(err <= 1e-10, "tau = {tau}: {err:e}");
    }
}

#[test]
fn sobolev_examples() {
    let g = make_grid(1, &[128], &[2.0 * PI]).unwrap();
    assert_eq!(sobolev_norm(&Field::zeros(&g), SobolevIndex::inhomogeneous(2.0)).unwrap(), 0.0);
    let u = mode(&g, 5.0);
    for s in [-2.0, 0.0, 0.5, 3.0] {
        let got = sobolev_norm(&u, SobolevIndex::inhomogeneous(s)).unwrap();
        assert!((got / 26f64.powf(s / 2.0) - 1.0).abs() < 1e-12, "s = {s}");
        let got = sobolev_norm(&u, SobolevIndex::homogeneous(s)).unwrap();
        assert!((got / 5f64.powf(s) - 1.0).abs() < 1e-12, "s = {s}");
    }
}

#[test]
fn gaussian_mass_and_l2_agree_with_closed_form() {
    let g = make_grid(1, &[256], &[60.0]).unwrap();
    let (a, sigma) = (1.7, 1.3);
    let u = gaussian(&g, a, sigma, 0.0);
    let exact = a * a * sigma * (2.0 * PI).sqrt();
    assert!((mass(&u) / exact - 1.0).abs() < 1e-8);
    let h0 = sobolev_norm(&u, SobolevIndex::inhomogeneous(0.0)).unwrap();
    assert!((h0 * h0 / exact - 1.0).abs() < 1e-8);
    assert!((h0 - u.l2_norm()).abs() < 1e-12 * h0);
}

#[test]
fn negative_homogeneous_norm_needs_vanishing_mean() {
    let g = make_grid(1, &[128], &[40.0]).unwrap();
    let u = gaussian(&g, 1.0, 1.0, 0.0);
    let err = sobolev_norm(&u, SobolevIndex::homogeneous(-1.0)).unwrap_err();
    assert!(matches!(err, GtError::Domain(_)));
    // Removing the zero mode makes the norm finite.
    let mut raw = u.raw_spectrum();
    raw[0] = Complex64::default();
    let v = Field::from_raw_spectrum(&g, raw);
    assert!(sobolev_norm(&v, SobolevIndex::homogeneous(-1.0)).unwrap().is_finite());
    assert!(sobolev_norm(&u, SobolevIndex::homogeneous(0.5)).is_ok());
}

#[test]
fn lebesgue_examples() {
    let g = make_grid(1, &[64], &[7.0]).unwrap();
    assert_eq!(lebesgue_norm(&Field::zeros(&g), 3.0), 0.0);
    let c = Field::from_fn(&g, |_| Complex64::new(0.6, -0.8));
    for q in [1.0, 2.0, 5.5] {
        assert!((lebesgue_norm(&c, q) - 7f64.powf(1.0 / q)).abs() < 1e-12);
    }
    // int A^4 e^{-x^2/sigma^2} dx = A^4 sigma sqrt(pi)
    let g = make_grid(1, &[256], &[60.0]).unwrap();
    let (a, sigma) = (1.2, 1.5);
    let u = gaussian(&g, a, sigma, 0.0);
    let exact = (a.powi(4) * sigma * PI.sqrt()).powf(0.25);
    assert!((lebesgue_norm(&u, 4.0) / exact - 1.0).abs() < 1e-8);
}

#[test]
fn gradient_examples() {
    let g = make_grid(2, &[16, 8], &[2.0 * PI, 4.0 * PI]).unwrap();
    let c = Field::from_fn(&g, |_| Complex64::new(2.0, 1.0));
    for d in gradient(&c) {
        assert!(d.max_abs() < 1e-13);
    }
    let u = Field::from_fn(&g, |x| Complex64::from_polar(1.0, 3.0 * x[0] - 1.5 * x[1]));
    let grad = gradient(&u);
    let want = [Complex64::new(0.0, 3.0), Complex64::new(0.0, -1.5)];
    for (d, w) in grad.iter().zip(want) {
        let exact = Field::from_fn(&g, |x| w * Complex64::from_polar(1.0, 3.0 * x[0] - 1.5 * x[1]));
        assert!(rel(d, &exact) < 1e-13);
    }
}

#[test]
fn gaussian_variance_and_parallel_axis() {
    let g = make_grid(1, &[512], &[80.0]).unwrap();
    let (a, sigma) = (1.1, 1.4);
    let u = gaussian(&g, a, sigma, 0.0);
    let v = moment_variance(&u);
    assert!(!v.degraded);
    let exact = a * a * sigma.powi(3) * (2.0 * PI).sqrt();
    assert!((v.value / exact - 1.0).abs() < 1e-6);
    let shift = 2.5;
    let moved = moment_variance(&gaussian(&g, a, sigma, shift)).value;
    let expect = v.value + shift * shift * mass(&u);
    assert!((moved / expect - 1.0).abs() < 1e-8);
}

#[test]
fn wide_data_flag_degraded_moments() {
    let g = make_grid(1, &[128], &[20.0]).unwrap();
    let u = gaussian(&g, 1.0, 3.0, 0.0);
    assert!(boundary_mass_fraction(&u) >= BOUNDARY_TOLERANCE);
    assert!(moment_variance(&u).degraded);
    assert!(radial_momentum(&u).degraded);
}

#[test]
fn radial_momentum_examples() {
    let g = make_grid(1, &[512], &[80.0]).unwrap();
    let (a, sigma) = (0.9, 1.2);
    let real = gaussian(&g, a, sigma, 0.0);
    assert!(radial_momentum(&real).value.abs() < 1e-12);
    // Modulated even profile: the integrand is odd.
    let boosted = Field::from_fn(&g, |x| {
        Complex64::from_polar(a * (-(x[0] * x[0]) / (4.0 * sigma * sigma)).exp(), 2.0 * x[0])
    });
    assert!(radial_momentum(&boosted).value.abs() < 1e-10);
    // A e^{-x^2/4 sigma^2} e^{i b x^2}: 4 Im int conj(u) x u' = 8 b v.
    let b = 0.3;
    let chirped = Field::from_fn(&g, |x| {
        Complex64::from_polar(a * (-(x[0] * x[0]) / (4.0 * sigma * sigma)).exp(), b * x[0] * x[0])
    });
    let exact = 8.0 * b * a * a * sigma.powi(3) * (2.0 * PI).sqrt();
    assert!((radial_momentum(&chirped).value / exact - 1.0).abs() < 1e-6);
}

#[test]
fn unitary_spectrum_round_trips() {
    let g = make_grid(2, &[16, 32], &[5.0, 9.0]).unwrap();
    let u = Field::from_fn(&g, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), x[1].sin()));
    let spec = spectrum(&u);
    let back = from_spectrum(&g, &spec).unwrap();
    assert!(rel(&back, &u) < 1e-14);
    // Plancherel with the unitary normalization.
    let dual: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dual_cell_volume();
    assert!((dual / mass(&u) - 1.0).abs() < 1e-12);
    assert!(from_spectrum(&g, &spec[1..]).is_err());
}

#[test]
fn gaussian_spectrum_matches_continuous_transform() {
    // Unitary transform of e^{-x^2/4 sigma^2} is sigma sqrt(2) e^{-sigma^2 xi^2}.
    let g = make_grid(1, &[256], &[60.0]).unwrap();
    let sigma = 1.3;
    let u = gaussian(&g, 1.0, sigma, 0.0);
    let spec = spectrum(&u);
    let xi = g.xi(0);
    for (z, k) in spec.iter().zip(&xi) {
        let exact = sigma * 2f64.sqrt() * (-(sigma * k).powi(2)).exp();
        assert!((z - exact).norm() < 1e-12, "xi = {k}");
    }
}
