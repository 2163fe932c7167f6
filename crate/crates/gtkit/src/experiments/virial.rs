//! Finite-difference confirmation of the virial identities along computed solutions.

use super::{outcome_of, Check, Outcome};
use crate::diagnostics::{virial_fd_check, virial_inequality_check, VirialFdReport};
use crate::error::{config, Result};
use crate::evolution::{evolve, SolverParams};
use crate::initial_data::{gaussian_data, GaussianParams};
use crate::nonlinearity::GTConfig;
use crate::spectral::make_grid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VirialCheckSpec {
    pub n_points: usize,
    pub length: f64,
    pub p: u32,
    pub amplitude: f64,
    pub sigma: f64,
    /// Record spacing; the run is backward so the one-sided bounds apply too.
    pub dt: f64,
    pub t_final: f64,
    pub tol_rel: f64,
    /// Required ratio of the `2h` error to the `h` error.
    pub min_improvement: f64,
}

impl Default for VirialCheckSpec {
    fn default() -> Self {
        VirialCheckSpec {
            n_points: 512,
            length: 48.0,
            p: 8,
            amplitude: 0.9,
            sigma: 1.5,
            dt: -0.0025,
            t_final: -0.25,
            tol_rel: 1e-4,
            min_improvement: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialRun {
    pub gamma: f64,
    pub dt_effective: f64,
    pub fine: VirialFdReport,
    pub coarse: VirialFdReport,
    /// Smallest margins of the one-sided bounds, relative to `v(0)`.
    pub v_margin_rel: f64,
    pub vdot1_margin_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialCheckReport {
    pub spec: VirialCheckSpec,
    pub runs: Vec<VirialRun>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

pub fn run_virial_check(spec: &VirialCheckSpec) -> Result<VirialCheckReport> {
    if !(spec.t_final < 0.0 && spec.dt < 0.0) {
        return config("the virial check runs backward from t = 0");
    }
    let grid = make_grid(1, &[spec.n_points], &[spec.length])?;
    let u0 = gaussian_data(
        &grid,
        &GaussianParams {
            a: spec.amplitude,
            sigma: spec.sigma,
        },
    )?;
    let runs = [1.0, -1.0]
        .par_iter()
        .map(|&gamma| -> Result<VirialRun> {
            let cfg = GTConfig::new(&grid, spec.p, gamma)?;
            let traj = evolve(&u0, &SolverParams::new(spec.dt, spec.t_final), &cfg)?;
            let fine = virial_fd_check(&traj.records, gamma, 1)?;
            let coarse = virial_fd_check(&traj.records, gamma, 2)?;
            let bounds = virial_inequality_check(&traj.records, &cfg)?;
            Ok(VirialRun {
                gamma,
                dt_effective: traj.dt,
                fine,
                coarse,
                v_margin_rel: bounds.min_v_margin_rel(),
                vdot1_margin_rel: bounds.min_vdot1_margin() / bounds.v0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    for r in &runs {
        for (name, f, c) in [
            ("dv/dt", &r.fine.first, &r.coarse.first),
            ("d(vdot1)/dt", &r.fine.second, &r.coarse.second),
        ] {
            checks.push(Check::new(
                &format!("{name} gamma={}", r.gamma),
                f.rel_error <= spec.tol_rel,
                format!("relative error {:.3e} vs {}", f.rel_error, spec.tol_rel),
            ));
            let gain = c.rel_error / f.rel_error;
            checks.push(Check::new(
                &format!("{name} gamma={} second order", r.gamma),
                gain >= spec.min_improvement,
                format!("error ratio {gain:.3} vs {}", spec.min_improvement),
            ));
        }
    }
    let outcome = outcome_of(&checks, false);
    Ok(VirialCheckReport {
        spec: spec.clone(),
        runs,
        checks,
        outcome,
    })
}
