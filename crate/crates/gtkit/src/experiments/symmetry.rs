//! Pseudo-symmetry residuals: a rescaled solution must solve the matching variant.
//!
//! `u_lambda(t, x) = lambda^{-alpha} u(t / lambda^2, x / lambda)` solves the averaged
//! variant on `[0, lambda^2]` when `alpha = 2/p` and the integrated one when `alpha = 4/p`.

use super::{outcome_of, Check, Outcome};
use crate::error::{config, Result};
use crate::evolution::{duhamel_residual, evolve, SolverParams, Trajectory};
use crate::initial_data::{gaussian_data, rescale, GaussianParams};
use crate::nonlinearity::{GTConfig, Variant};
use crate::spectral::make_grid;
use serde::{Deserialize, Serialize};

/// Largest enlarged grid the check will allocate.
const MAX_ENLARGED_POINTS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetrySpec {
    pub n_points: usize,
    pub length: f64,
    pub p: u32,
    pub gamma: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub dt: f64,
    pub t_final: f64,
    pub capture_every: usize,
    pub lambdas: Vec<usize>,
    /// Pass if the correct-variant residual is at most this multiple of the solver's.
    pub tol_factor: f64,
    /// The wrong variant must exceed this multiple of the solver's residual.
    pub control_factor: f64,
}

impl Default for SymmetrySpec {
    fn default() -> Self {
        SymmetrySpec {
            n_points: 256,
            length: 40.0,
            p: 2,
            gamma: 1.0,
            amplitude: 1.0,
            sigma: 1.5,
            dt: 0.005,
            t_final: 0.5,
            capture_every: 5,
            lambdas: vec![1, 2],
            tol_factor: 5.0,
            control_factor: 100.0,
        }
    }
}

/// One rescaling, checked against the variant it should solve and the other one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryRow {
    pub lambda: usize,
    /// `"monomial"` (`alpha = 2/p`) or `"integrated"` (`alpha = 4/p`).
    pub rescaling: String,
    pub alpha: f64,
    pub correct_variant: Variant,
    /// Residual relative to `||u_lambda(0)||_{L^2}`.
    pub residual: f64,
    /// `None` at `lambda = 1`, where both variants coincide.
    pub wrong_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub spec: SymmetrySpec,
    pub dt_effective: f64,
    /// Relative Duhamel residual of the unscaled run under its own equation.
    pub solver_tolerance: f64,
    pub rows: Vec<SymmetryRow>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

/// Rescales every snapshot and stretches time by `lambda^2`.
pub fn rescale_trajectory(traj: &Trajectory, lambda: usize, alpha: f64) -> Result<Trajectory> {
    let l2 = (lambda * lambda) as f64;
    Ok(Trajectory {
        times: traj.times.iter().map(|t| t * l2).collect(),
        snapshots: traj
            .snapshots
            .iter()
            .map(|u| rescale(u, lambda, alpha))
            .collect::<Result<Vec<_>>>()?,
        records: Vec::new(),
        blowup_suspected: traj.blowup_suspected,
        steps_accepted: traj.steps_accepted,
        steps_rejected: traj.steps_rejected,
        dt: traj.dt * l2,
    })
}

fn relative_residual(traj: &Trajectory, cfg: &GTConfig) -> Result<f64> {
    Ok(duhamel_residual(traj, cfg)? / traj.snapshots[0].l2_norm())
}

pub fn run_symmetry_check(spec: &SymmetrySpec) -> Result<SymmetryReport> {
    if spec.lambdas.is_empty() {
        return config("the lambda list is empty");
    }
    let grid = make_grid(1, &[spec.n_points], &[spec.length])?;
    for &lam in &spec.lambdas {
        if lam == 0 || grid.len().saturating_mul(lam) > MAX_ENLARGED_POINTS {
            return config(format!("lambda = {lam} would exceed the enlarged-grid limit"));
        }
    }
    let cfg = GTConfig::new(&grid, spec.p, spec.gamma)?;
    let u0 = gaussian_data(
        &grid,
        &GaussianParams {
            a: spec.amplitude,
            sigma: spec.sigma,
        },
    )?;
    let mut params = SolverParams::new(spec.dt, spec.t_final);
    params.capture_every = spec.capture_every;
    params.record = false;
    let traj = evolve(&u0, &params, &cfg)?;
    let solver_tolerance = relative_residual(&traj, &cfg)?;

    let pf = spec.p as f64;
    let mut rows = Vec::new();
    for &lam in &spec.lambdas {
        for (name, alpha, correct, wrong) in [
            ("monomial", 2.0 / pf, Variant::AveragedInterval, Variant::IntegratedInterval),
            ("integrated", 4.0 / pf, Variant::IntegratedInterval, Variant::AveragedInterval),
        ] {
            let scaled = rescale_trajectory(&traj, lam, alpha)?;
            let big = scaled.grid().clone();
            let span = (lam * lam) as f64;
            let with = |v: Variant| GTConfig::with_variant(&big, spec.p, spec.gamma, v, span);
            let residual = relative_residual(&scaled, &with(correct)?)?;
            let wrong_residual = if lam == 1 {
                None
            } else {
                Some(relative_residual(&scaled, &with(wrong)?)?)
            };
            rows.push(SymmetryRow {
                lambda: lam,
                rescaling: name.to_string(),
                alpha,
                correct_variant: correct,
                residual,
                wrong_residual,
            });
        }
    }

    let mut checks = Vec::new();
    for r in &rows {
        let limit = spec.tol_factor * solver_tolerance;
        checks.push(Check::new(
            &format!("lambda={} {} residual", r.lambda, r.rescaling),
            r.residual <= limit,
            format!("{:.3e} vs {limit:.3e}", r.residual),
        ));
        if let Some(w) = r.wrong_residual {
            let floor = spec.control_factor * solver_tolerance;
            checks.push(Check::new(
                &format!("lambda={} {} wrong variant rejected", r.lambda, r.rescaling),
                w >= floor,
                format!("{w:.3e} vs {floor:.3e}"),
            ));
        }
    }
    let outcome = outcome_of(&checks, false);
    Ok(SymmetryReport {
        spec: spec.clone(),
        dt_effective: traj.dt,
        solver_tolerance,
        rows,
        checks,
        outcome,
    })
}
