//! Growth of the first iterate on focusing annulus data below the monomial critical index.

use super::{fit_loglog, outcome_of, Check, FitResult, Outcome};
use crate::error::{config, GtError, Result};
use crate::initial_data::{annulus_bump, critical_regularities};
use crate::nonlinearity::GTConfig;
use crate::picard::tau::xi1_tau;
use crate::spectral::{make_grid, sobolev_norm, SobolevIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticIpSpec {
    pub n_points: usize,
    pub length: f64,
    pub p: u32,
    pub gamma: f64,
    /// Base frequencies `N` of the annulus data.
    pub n_list: Vec<f64>,
    /// Regularity below the critical index.
    pub s: f64,
    /// Horizon `T`.
    pub horizon: f64,
    /// Sample times as fractions of `T` for the sup in time.
    pub time_fractions: Vec<f64>,
    pub phase_per_panel: f64,
    /// Relative tolerance on the growth exponent.
    pub tol_growth: f64,
    /// Absolute tolerance on the slope at the critical index.
    pub tol_flat: f64,
    /// Relative tolerance on the `H^0` doubling factor.
    pub tol_doubling: f64,
}

impl Default for AnalyticIpSpec {
    fn default() -> Self {
        AnalyticIpSpec {
            n_points: 4096,
            length: 128.0,
            p: 2,
            gamma: 1.0,
            n_list: vec![4.0, 8.0, 16.0],
            s: -1.0,
            horizon: 0.25,
            time_fractions: vec![0.25, 0.5, 0.75, 1.0],
            phase_per_panel: 1.0,
            tol_growth: 0.15,
            tol_flat: 0.1,
            tol_doubling: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticIpPoint {
    pub n: f64,
    pub times: Vec<f64>,
    /// `||psi_N||_{H^s}`, `||psi_N||_{H^{s_m}}`, `||psi_N||_{L^2}`.
    pub data_norm_s: f64,
    pub data_norm_critical: f64,
    pub data_norm_l2: f64,
    /// `||Xi_1(t)||_{H^s}` per sample time.
    pub xi1_norm_s: Vec<f64>,
    pub xi1_norm_critical: Vec<f64>,
    pub ratio_s: f64,
    pub ratio_critical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticIpReport {
    pub spec: AnalyticIpSpec,
    pub s_m: f64,
    pub xi_max: f64,
    pub points: Vec<AnalyticIpPoint>,
    pub growth_fit: FitResult,
    /// `p (s_m - s)`.
    pub growth_expected: f64,
    pub critical_fit: FitResult,
    /// Slopes between consecutive `N`, at `s` and at `s_m`. In one dimension the cubic
    /// interaction carries a `ln N` factor, so these drift down only slowly.
    pub local_slopes_s: Vec<f64>,
    pub local_slopes_critical: Vec<f64>,
    /// `||psi_{2N}||_{L^2} / ||psi_N||_{L^2}` for each doubling in the list.
    pub doubling_factors: Vec<f64>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

/// `||Xi_1(psi_N)||_{L^inf_t H^s} / ||psi_N||^{p+1}_{H^s}` over `N`, at `s` and at `s_m`.
pub fn run_analytic_ip(spec: &AnalyticIpSpec) -> Result<AnalyticIpReport> {
    let grid = make_grid(1, &[spec.n_points], &[spec.length])?;
    let cfg = GTConfig::new(&grid, spec.p, spec.gamma)?;
    let (s_m, _) = critical_regularities(1, spec.p);
    if !(spec.s < s_m) {
        return config(format!("s = {} must lie below s_m = {s_m}", spec.s));
    }
    if spec.n_list.len() < 2 || !(spec.horizon > 0.0) {
        return config("need two frequencies and a positive horizon");
    }
    if spec.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return config("frequencies must increase");
    }
    let focus = spec.horizon.min(1.0);
    let xi_max = grid.xi_max(0);
    for &n in &spec.n_list {
        if n * n < 2.0 / focus {
            return config(format!("N = {n} violates N^2 >= 2 / (T ^ 1)"));
        }
        if 4.0 * n >= xi_max {
            return Err(GtError::Domain(format!("annulus at N = {n} exceeds bandwidth {xi_max}")));
        }
    }
    let times: Vec<f64> = spec.time_fractions.iter().map(|f| f * spec.horizon).collect();
    let pf = spec.p as f64 + 1.0;

    let points = spec
        .n_list
        .par_iter()
        .map(|&n| -> Result<AnalyticIpPoint> {
            let psi = annulus_bump(&grid, n, spec.horizon)?;
            let xi1 = xi1_tau(&psi, &times, &cfg, spec.phase_per_panel)?;
            let norm = |f: &crate::spectral::Field, s: f64| sobolev_norm(f, SobolevIndex::inhomogeneous(s));
            let data_norm_s = norm(&psi, spec.s)?;
            let data_norm_critical = norm(&psi, s_m)?;
            let xi1_norm_s = xi1.iter().map(|f| norm(f, spec.s)).collect::<Result<Vec<_>>>()?;
            let xi1_norm_critical = xi1.iter().map(|f| norm(f, s_m)).collect::<Result<Vec<_>>>()?;
            let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
            Ok(AnalyticIpPoint {
                n,
                times: times.clone(),
                data_norm_l2: psi.l2_norm(),
                ratio_s: sup(&xi1_norm_s) / data_norm_s.powf(pf),
                ratio_critical: sup(&xi1_norm_critical) / data_norm_critical.powf(pf),
                data_norm_s,
                data_norm_critical,
                xi1_norm_s,
                xi1_norm_critical,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    let growth_fit = fit_loglog(&ns, &points.iter().map(|p| p.ratio_s).collect::<Vec<_>>())?;
    let critical_fit = fit_loglog(&ns, &points.iter().map(|p| p.ratio_critical).collect::<Vec<_>>())?;
    let growth_expected = spec.p as f64 * (s_m - spec.s);
    let local = |f: fn(&AnalyticIpPoint) -> f64| -> Vec<f64> {
        points
            .windows(2)
            .map(|w| (f(&w[1]) / f(&w[0])).ln() / (w[1].n / w[0].n).ln())
            .collect()
    };
    let local_slopes_s = local(|p| p.ratio_s);
    let local_slopes_critical = local(|p| p.ratio_critical);

    let mut doubling_factors = Vec::new();
    for a in &points {
        if let Some(b) = points.iter().find(|b| b.n == 2.0 * a.n) {
            doubling_factors.push(b.data_norm_l2 / a.data_norm_l2);
        }
    }
    let mut checks = vec![
        Check::within(
            "growth exponent below s_m",
            growth_fit.exponent,
            growth_expected,
            spec.tol_growth * growth_expected,
        ),
        Check::within("flat at s_m", critical_fit.exponent, 0.0, spec.tol_flat),
    ];
    let target = 2f64.sqrt();
    checks.push(Check::new(
        "L2 norm doubles by 2^{1/2}",
        !doubling_factors.is_empty()
            && doubling_factors
                .iter()
                .all(|f| (f - target).abs() <= spec.tol_doubling * target),
        format!("{doubling_factors:?}"),
    ));
    let outcome = outcome_of(&checks, false);
    Ok(AnalyticIpReport {
        spec: spec.clone(),
        s_m,
        xi_max,
        points,
        growth_fit,
        growth_expected,
        critical_fit,
        local_slopes_s,
        local_slopes_critical,
        doubling_factors,
        checks,
        outcome,
    })
}
