//! Gaussian norm scalings behind energy-supercritical inflation, from closed forms.
//!
//! For `u0 = A e^{-|x|^2/4 sigma^2}`,
//! `|e^{i tau Delta} u0|^{p+2}` integrates in `x` to
//! `A^{p+2} sigma^{d(p+1)} (4 pi / (p+2))^{d/2} (sigma^4 + tau^2)^{-dp/4}`,
//! leaving a one-dimensional `tau` integral. The `H^s` norm reduces to a radial integral.

use super::{fit_loglog, log_space, outcome_of, Check, FitResult, Outcome};
use crate::error::{config, Result};
use crate::initial_data::critical_regularities;
use crate::nonlinearity::gauss_legendre_4;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InflationEnergySpec {
    pub d: usize,
    pub p: u32,
    pub s: f64,
    pub gamma: f64,
    pub eps_list: Vec<f64>,
    /// Amplitude held fixed for the width fits.
    pub fit_amplitude: f64,
    /// Widths for the fits at fixed amplitude.
    pub fit_sigmas: Vec<f64>,
    /// Largest grid size per axis a full solve may use.
    pub max_points_per_axis: usize,
    /// Relative tolerance on the four exponents.
    pub tol_exponent: f64,
    pub tol_identity: f64,
}

impl Default for InflationEnergySpec {
    fn default() -> Self {
        InflationEnergySpec {
            d: 3,
            p: 10,
            s: 1.0,
            gamma: -1.0,
            eps_list: vec![0.5, 0.4, 0.3, 0.2],
            fit_amplitude: 1.0,
            fit_sigmas: log_space(1e-3, 1e-2, 5),
            max_points_per_axis: 128,
            tol_exponent: 0.02,
            tol_identity: 1e-10,
        }
    }
}

/// Closed-form (up to one-dimensional quadrature) norms of a Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianScalings {
    pub a: f64,
    pub sigma: f64,
    /// `||u0||^2_{H^s}`.
    pub hs_sq: f64,
    /// `U(0) = (p + 2)^{-1} int_0^1 int |e^{i tau Delta} u0|^{p+2}`, as in the energy.
    pub potential: f64,
    /// `||u0||^2_{H^1 dot}`.
    pub kinetic: f64,
    /// `int |x|^2 |u0|^2`.
    pub variance: f64,
    pub mass: f64,
}

fn unit_sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked by the caller"),
    }
}

/// Composite Gauss-Legendre over geometrically growing panels from `0`.
fn graded_integral(first: f64, end: f64, per_panel: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut a = 0.0;
    let mut b = first.min(end);
    let mut total = 0.0;
    loop {
        let h = (b - a) / per_panel as f64;
        for k in 0..per_panel {
            for (x, w) in gauss_legendre_4(a + k as f64 * h, a + (k + 1) as f64 * h) {
                total += w * f(x);
            }
        }
        if b >= end {
            return total;
        }
        a = b;
        b = (2.0 * b).min(end);
    }
}

/// Norms of `A e^{-|x|^2/4 sigma^2}` in dimension `d` for power `p` and index `s`.
pub fn gaussian_scalings(d: usize, p: u32, s: f64, a: f64, sigma: f64) -> Result<GaussianScalings> {
    if !(1..=3).contains(&d) {
        return config("dimension must be 1, 2 or 3");
    }
    if !(a > 0.0 && sigma > 0.0) {
        return config("Gaussian amplitude and width must be positive");
    }
    let df = d as f64;
    let pf = p as f64;
    let mass = a * a * (2.0 * PI * sigma * sigma).powf(df / 2.0);
    let variance = df * sigma * sigma * mass;
    let kinetic = df * mass / (4.0 * sigma * sigma);
    // |u0^|^2 = A^2 (2 sigma^2)^d e^{-2 sigma^2 r^2}; the Gaussian factor is negligible past 8 / sigma.
    let radial = graded_integral(1.0 / sigma, 8.0 / sigma, 64, |r| {
        (1.0 + r * r).powf(s) * (-2.0 * sigma * sigma * r * r).exp() * r.powf(df - 1.0)
    });
    let hs_sq = a * a * (2.0 * sigma * sigma).powf(df) * unit_sphere_area(d) * radial;
    let s4 = sigma.powi(4);
    let tau = graded_integral(sigma * sigma, 1.0, 64, |t| (s4 + t * t).powf(-df * pf / 4.0));
    let potential =
        a.powf(pf + 2.0) * sigma.powf(df * (pf + 1.0)) * (4.0 * PI / (pf + 2.0)).powf(df / 2.0) * tau / (pf + 2.0);
    Ok(GaussianScalings {
        a,
        sigma,
        hs_sq,
        potential,
        kinetic,
        variance,
        mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsPoint {
    pub eps: f64,
    pub sigma: f64,
    pub amplitude: f64,
    /// `(A^p sigma^4)^s eps^2`, which should be `1`.
    pub identity: f64,
    pub norms: GaussianScalings,
    /// `E` with the configured sign of `gamma`.
    pub energy: f64,
    /// `-sqrt(v(0) / E)`, when `E > 0`.
    pub t_equipartition: Option<f64>,
    /// `E^s M^{1-s}`, the predicted order of `||u(T)||^2_{H^s}`.
    pub predicted_hs_sq: f64,
    /// Grid points per axis a full solve would need.
    pub points_required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationEnergyReport {
    pub spec: InflationEnergySpec,
    pub s_i: f64,
    /// `"scalings-only"` or `"full-solve"`.
    pub mode: String,
    pub mode_reason: String,
    pub points: Vec<EpsPoint>,
    pub fit_points: Vec<GaussianScalings>,
    pub hs_fit: FitResult,
    pub potential_fit: FitResult,
    pub kinetic_fit: FitResult,
    pub variance_fit: FitResult,
    /// `d - 2s`, `d + 2`, `d - 2`, `d + 2`.
    pub expected: [f64; 4],
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

/// Parameter choice `sigma^{2(s_i - s)} = eps^{1 + 4/(sp)}`, `A^p = eps^{-2/s} sigma^{-4}`
/// and the four width exponents at fixed amplitude.
pub fn run_inflation_energy(spec: &InflationEnergySpec) -> Result<InflationEnergyReport> {
    let (d, p, s) = (spec.d, spec.p, spec.s);
    crate::nonlinearity::validate_power(p)?;
    crate::nonlinearity::validate_gamma(spec.gamma)?;
    let (_, s_i) = critical_regularities(d, p);
    if !(s >= 1.0 && s < s_i) {
        return config(format!("need 1 <= s < s_i = {s_i}, got s = {s}"));
    }
    if spec.eps_list.is_empty() || spec.fit_sigmas.len() < 2 {
        return config("need a nonempty eps list and two fit widths");
    }
    let pf = p as f64;
    let mut points = Vec::new();
    for &eps in &spec.eps_list {
        if !(eps > 0.0 && eps < 1.0) {
            return config("eps must lie in (0, 1)");
        }
        let sigma = eps.powf((1.0 + 4.0 / (s * pf)) / (2.0 * (s_i - s)));
        let amplitude = (eps.powf(-2.0 / s) * sigma.powi(-4)).powf(1.0 / pf);
        let norms = gaussian_scalings(d, p, s, amplitude, sigma)?;
        let energy = -spec.gamma / 2.0 * norms.kinetic + norms.potential;
        let t_equipartition = (energy > 0.0).then(|| -(norms.variance / energy).sqrt());
        let xi_req = 10.0 * (energy.abs().max(norms.kinetic) / norms.mass).sqrt();
        let spread = t_equipartition.map_or(0.0, |t| 4.0 * t.abs() * xi_req);
        let points_required = (16.0 * sigma + spread) * xi_req / PI;
        points.push(EpsPoint {
            eps,
            sigma,
            amplitude,
            identity: (amplitude.powf(pf) * sigma.powi(4)).powf(s) * eps * eps,
            norms,
            energy,
            t_equipartition,
            predicted_hs_sq: energy.abs().powf(s) * norms.mass.powf(1.0 - s),
            points_required,
        });
    }
    let feasible = points
        .iter()
        .any(|pt| pt.points_required <= spec.max_points_per_axis as f64);
    let (mode, mode_reason) = if feasible {
        (
            "full-solve".to_string(),
            "at least one eps is resolvable; run the equipartition and focusing experiments at it".to_string(),
        )
    } else {
        let least = points.iter().map(|pt| pt.points_required).fold(f64::INFINITY, f64::min);
        (
            "scalings-only".to_string(),
            format!(
                "a full solve needs at least {least:.3e} points per axis, the budget is {}",
                spec.max_points_per_axis
            ),
        )
    };

    let fit_points = spec
        .fit_sigmas
        .iter()
        .map(|&sg| gaussian_scalings(d, p, s, spec.fit_amplitude, sg))
        .collect::<Result<Vec<_>>>()?;
    let sig: Vec<f64> = fit_points.iter().map(|g| g.sigma).collect();
    let col = |f: fn(&GaussianScalings) -> f64| fit_points.iter().map(f).collect::<Vec<f64>>();
    let hs_fit = fit_loglog(&sig, &col(|g| g.hs_sq))?;
    let potential_fit = fit_loglog(&sig, &col(|g| g.potential))?;
    let kinetic_fit = fit_loglog(&sig, &col(|g| g.kinetic))?;
    let variance_fit = fit_loglog(&sig, &col(|g| g.variance))?;
    let df = d as f64;
    let expected = [df - 2.0 * s, df + 2.0, df - 2.0, df + 2.0];

    let mut checks = Vec::new();
    for (name, fit, e) in [
        ("H^s norm exponent", &hs_fit, expected[0]),
        ("potential exponent", &potential_fit, expected[1]),
        ("kinetic exponent", &kinetic_fit, expected[2]),
        ("variance exponent", &variance_fit, expected[3]),
    ] {
        checks.push(Check::within(name, fit.exponent, e, spec.tol_exponent * e.abs()));
    }
    let worst = points.iter().map(|pt| (pt.identity - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "(A^p sigma^4)^s = eps^-2",
        worst <= spec.tol_identity,
        format!("max relative deviation {worst:.3e}"),
    ));
    let outcome = outcome_of(&checks, false);
    Ok(InflationEnergyReport {
        spec: spec.clone(),
        s_i,
        mode,
        mode_reason,
        points,
        fit_points,
        hs_fit,
        potential_fit,
        kinetic_fit,
        variance_fit,
        expected,
        checks,
        outcome,
    })
}
