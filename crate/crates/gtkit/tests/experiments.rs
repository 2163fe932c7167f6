use gtkit::experiments::*;
use gtkit::initial_data::{gaussian_data, GaussianParams};
use gtkit::nonlinearity::{potential_energy, GTConfig};
use gtkit::spectral::{make_grid, mass, moment_variance, sobolev_norm, SobolevIndex};

#[test]
fn exact_power_law_fits_perfectly() {
    let x = [1.0, 2.0, 5.0, 11.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.75)).collect();
    let f = fit_loglog(&x, &y).unwrap();
    assert!((f.exponent + 1.75).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!((f.r_squared - 1.0).abs() < 1e-12);
    assert!(f.stderr.unwrap() < 1e-12);
    assert_eq!(f.points.len(), 4);
    let two = fit_loglog(&x[..2], &y[..2]).unwrap();
    assert!(two.stderr.is_none());
}

#[test]
fn noisy_fit_reports_its_spread() {
    let x = [1.0, 2.0, 4.0, 8.0, 16.0];
    let wobble = [1.0, 1.1, 0.9, 1.05, 0.97];
    let y: Vec<f64> = x.iter().zip(wobble).map(|(v, w)| w * v * v).collect();
    let f = fit_loglog(&x, &y).unwrap();
    assert!((f.exponent - 2.0).abs() < 0.05);
    assert!(f.r_squared < 1.0 && f.r_squared > 0.99);
    assert!(f.stderr.unwrap() > 0.0);
}

#[test]
fn bad_fit_inputs_are_rejected() {
    assert!(fit_loglog(&[1.0], &[1.0]).is_err());
    assert!(fit_loglog(&[1.0, 2.0], &[1.0]).is_err());
    assert!(fit_loglog(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    assert!(fit_loglog(&[2.0, 2.0], &[1.0, 3.0]).is_err());
}

#[test]
fn log_space_hits_both_ends() {
    let v = log_space(0.01, 10.0, 4);
    assert_eq!(v.len(), 4);
    assert!((v[0] - 0.01).abs() < 1e-15 && (v[3] - 10.0).abs() < 1e-12);
    assert!((v[1] / v[0] - 10.0).abs() < 1e-9);
}

#[test]
fn outcome_needs_every_check() {
    let ok = Check::within("a", 1.0, 1.02, 0.05);
    let bad = Check::within("b", 1.0, 1.2, 0.05);
    assert!(ok.passed && !bad.passed);
    assert_eq!(outcome_of(&[ok.clone()], false), Outcome::Pass);
    assert_eq!(outcome_of(&[ok.clone(), bad], false), Outcome::Fail);
    assert_eq!(outcome_of(&[ok], true), Outcome::Inconclusive);
}

#[test]
fn closed_form_gaussian_norms_match_the_grid() {
    let grid = make_grid(1, &[512], &[60.0]).unwrap();
    let (a, sigma) = (1.3, 1.2);
    let u = gaussian_data(&grid, &GaussianParams { a, sigma }).unwrap();
    for p in [2, 8] {
        let g = gaussian_scalings(1, p, -1.0, a, sigma).unwrap();
        assert!((g.mass / mass(&u) - 1.0).abs() < 1e-8);
        assert!((g.variance / moment_variance(&u).value - 1.0).abs() < 1e-8);
        let h1 = sobolev_norm(&u, SobolevIndex::homogeneous(1.0)).unwrap().powi(2);
        assert!((g.kinetic / h1 - 1.0).abs() < 1e-8);
        let hs = sobolev_norm(&u, SobolevIndex::inhomogeneous(-1.0)).unwrap().powi(2);
        assert!((g.hs_sq / hs - 1.0).abs() < 1e-6, "{} vs {hs}", g.hs_sq);
        let cfg = GTConfig::new(&grid, p, -1.0).unwrap();
        let pot = potential_energy(&u, &cfg).unwrap();
        assert!((g.potential / pot - 1.0).abs() < 1e-6, "p = {p}: {} vs {pot}", g.potential);
    }
}

#[test]
fn scaling_table_is_reproducible() {
    let spec = InflationEnergySpec::default();
    let a = run_inflation_energy(&spec).unwrap();
    let b = run_inflation_energy(&spec).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.outcome, Outcome::Pass);
}

#[test]
fn preconditions_are_enforced() {
    let mut ip = AnalyticIpSpec::default();
    ip.s = -0.5;
    assert!(run_analytic_ip(&ip).is_err());
    let mut ip = AnalyticIpSpec::default();
    ip.n_list = vec![8.0, 4.0];
    assert!(run_analytic_ip(&ip).unwrap_err().to_string().contains("increase"));

    let mut neg = InflationNegSpec::default();
    neg.s = -1.0;
    assert!(run_inflation_negative(&neg).is_err());

    let mut eq = EquipartitionSpec::default();
    eq.p = 4;
    assert!(run_equipartition(&eq).is_err());
    let mut eq = EquipartitionSpec::default();
    eq.amplitude = 1.0;
    assert!(run_equipartition(&eq).unwrap_err().to_string().contains("below 10"));

    let mut sym = SymmetrySpec::default();
    sym.lambdas.clear();
    assert!(run_symmetry_check(&sym).is_err());

    let mut vir = VirialCheckSpec::default();
    vir.dt = vir.dt.abs();
    vir.t_final = vir.t_final.abs();
    assert!(run_virial_check(&vir).is_err());

    let mut en = InflationEnergySpec::default();
    en.eps_list = vec![2.0];
    assert!(run_inflation_energy(&en).is_err());
}

#[test]
fn sweep_ids_match_the_cli_names() {
    let ids: Vec<&str> = [
        SweepSpec::InflateNeg(Default::default()),
        SweepSpec::Ipscale(Default::default()),
        SweepSpec::Equipartition(Default::default()),
        SweepSpec::InflateEnergy(Default::default()),
        SweepSpec::Symmetry(Default::default()),
        SweepSpec::VirialCheck(Default::default()),
    ]
    .iter()
    .map(|s| s.id())
    .collect();
    assert_eq!(
        ids,
        ["inflate-neg", "ipscale", "equipartition", "inflate-energy", "symmetry", "virial-check"]
    );
}
