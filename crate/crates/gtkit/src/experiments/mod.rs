//! Scripted sweeps that measure scaling exponents and emit verdicts.
//!
//! Every report embeds the effective (post-snapping) parameters and the tolerances
//! used, and is a pure function of its spec.

mod analytic;
mod energy;
mod equipartition;
mod inflation;
mod symmetry;
mod virial;

pub use analytic::{run_analytic_ip, AnalyticIpPoint, AnalyticIpReport, AnalyticIpSpec};
pub use energy::{
    gaussian_scalings, run_inflation_energy, EpsPoint, GaussianScalings, InflationEnergyReport, InflationEnergySpec,
};
pub use equipartition::{
    run_equipartition, run_focusing_proxy, EquipartitionReport, EquipartitionSpec, FocusingReport,
};
pub use inflation::{
    lower_bound_terms, run_inflation_negative, InflationNegPoint, InflationNegReport, InflationNegSpec, LowerBoundTerms,
    Requirements,
};
pub use symmetry::{rescale_trajectory, run_symmetry_check, SymmetryReport, SymmetryRow, SymmetrySpec};
pub use virial::{run_virial_check, VirialCheckReport, VirialCheckSpec, VirialRun};

use crate::error::{config, Result};
use serde::{Deserialize, Serialize};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub intercept: f64,
    /// `None` with fewer than three points.
    pub stderr: Option<f64>,
    pub r_squared: f64,
    /// `(x, y)` before taking logarithms.
    pub points: Vec<(f64, f64)>,
}

/// Fits `y ~ C x^exponent`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() || x.len() < 2 {
        return config("a fit needs at least two paired points");
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return config("log-log fits need finite positive values");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return config("fit abscissae must not all coincide");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let stderr = (lx.len() > 2).then(|| (ssr / (n - 2.0) / sxx).sqrt());
    Ok(FitResult {
        exponent: slope,
        intercept,
        stderr,
        r_squared,
        points: x.iter().cloned().zip(y.iter().cloned()).collect(),
    })
}

/// One named verdict with the measured value and the target it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    /// `|value - target| <= tol`.
    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Check::new(
            name,
            (value - target).abs() <= tol,
            format!("{value:.6} vs {target:.6} (tol {tol})"),
        )
    }
}

/// Outcome class of a report, mapped to exit codes by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

pub fn outcome_of(checks: &[Check], inconclusive: bool) -> Outcome {
    if inconclusive {
        Outcome::Inconclusive
    } else if checks.iter().all(|c| c.passed) {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// Any experiment spec, tagged by experiment id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum SweepSpec {
    InflateNeg(InflationNegSpec),
    Ipscale(AnalyticIpSpec),
    Equipartition(EquipartitionSpec),
    InflateEnergy(InflationEnergySpec),
    Symmetry(SymmetrySpec),
    VirialCheck(VirialCheckSpec),
}

impl SweepSpec {
    /// The tag used in configuration files and on the command line.
    pub fn id(&self) -> &'static str {
        match self {
            SweepSpec::InflateNeg(_) => "inflate-neg",
            SweepSpec::Ipscale(_) => "ipscale",
            SweepSpec::Equipartition(_) => "equipartition",
            SweepSpec::InflateEnergy(_) => "inflate-energy",
            SweepSpec::Symmetry(_) => "symmetry",
            SweepSpec::VirialCheck(_) => "virial-check",
        }
    }
}

/// `n` points spaced evenly in `ln` between `lo` and `hi`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
