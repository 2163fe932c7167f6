//! Backward runs from concentrated Gaussian data: kinetic/potential equipartition in the
//! defocusing case and the virial blowup proxy in the focusing case.

use super::{outcome_of, Check, Outcome};
use crate::diagnostics::{defocusing_constant, DiagnosticsRecord};
use crate::error::{config, Result};
use crate::evolution::{evolve, SolverParams};
use crate::initial_data::{gaussian_data, GaussianParams};
use crate::nonlinearity::GTConfig;
use crate::spectral::make_grid;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquipartitionSpec {
    pub n_points: usize,
    pub length: f64,
    pub p: u32,
    pub amplitude: f64,
    pub sigma: f64,
    /// Base step magnitude; runs go backward.
    pub dt: f64,
    pub capture_every: usize,
    pub tail_tol: f64,
    /// Required `ratio(T) / ratio(0)`.
    pub growth_factor: f64,
    /// Largest `ratio(0)` accepted as a kinetic-poor start.
    pub initial_ratio_max: f64,
}

impl Default for EquipartitionSpec {
    fn default() -> Self {
        EquipartitionSpec {
            n_points: 256,
            length: 40.0,
            p: 8,
            amplitude: 10f64.powf(1.0 / 8.0),
            sigma: 1.0,
            dt: 1e-3,
            capture_every: 10,
            tail_tol: 1e-6,
            growth_factor: 10.0,
            initial_ratio_max: 0.1,
        }
    }
}

impl EquipartitionSpec {
    fn validate(&self) -> Result<()> {
        if self.p < 8 {
            return config("one-dimensional equipartition needs p >= 8");
        }
        let q = self.amplitude.powi(self.p as i32) * self.sigma.powi(4);
        if q < 10.0 * (1.0 - 1e-12) {
            return config(format!("A^p sigma^4 = {q} is below 10"));
        }
        if !(self.dt > 0.0) {
            return config("dt is a positive magnitude");
        }
        Ok(())
    }

    fn solve(&self, gamma: f64, horizon: impl Fn(&DiagnosticsRecord) -> Result<f64>) -> Result<Run> {
        self.validate()?;
        let grid = make_grid(1, &[self.n_points], &[self.length])?;
        let cfg = GTConfig::new(&grid, self.p, gamma)?;
        let u0 = gaussian_data(
            &grid,
            &GaussianParams {
                a: self.amplitude,
                sigma: self.sigma,
            },
        )?;
        let r0 = crate::diagnostics::record(&u0, 0.0, &cfg, &[])?;
        let t_target = horizon(&r0)?;
        let mut params = SolverParams::new(-self.dt, t_target);
        params.capture_every = self.capture_every;
        params.tail_tol = Some(self.tail_tol);
        let traj = evolve(&u0, &params, &cfg)?;
        Ok(Run {
            t_target,
            dt_effective: traj.dt,
            blowup_suspected: traj.blowup_suspected,
            final_time: traj.final_time(),
            steps_rejected: traj.steps_rejected,
            records: traj.records,
        })
    }
}

struct Run {
    t_target: f64,
    dt_effective: f64,
    blowup_suspected: bool,
    final_time: f64,
    steps_rejected: usize,
    records: Vec<DiagnosticsRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquipartitionReport {
    pub spec: EquipartitionSpec,
    pub dt_effective: f64,
    pub energy: f64,
    pub v0: f64,
    /// `-sqrt(v(0) / E)`.
    pub t_equipartition: f64,
    pub final_time: f64,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    pub growth: f64,
    pub max_tail: f64,
    /// `min ||u||^2_{H^1 dot} (v(0) + E t^2) / (E^2 t^2)` over the run.
    pub c_fit: f64,
    /// The same minimum restricted to `t >= -1/2`.
    pub c_fit_window: f64,
    /// `16 / max(1, C(d, p))`.
    pub c_star: f64,
    pub inconclusive: bool,
    pub diagnostics: Vec<String>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

/// Defocusing backward run to `T = -sqrt(v(0)/E)` with the tail monitored.
pub fn run_equipartition(spec: &EquipartitionSpec) -> Result<EquipartitionReport> {
    let run = spec.solve(-1.0, |r0| {
        if !(r0.energy > 0.0) {
            return config("defocusing energy must be positive");
        }
        Ok(-(r0.variance / r0.energy).sqrt())
    })?;
    let recs = &run.records;
    let r0 = &recs[0];
    let (e, v0) = (r0.energy, r0.variance);
    let ratios: Vec<f64> = recs.iter().map(|r| r.equip_ratio.unwrap_or(f64::NAN)).collect();
    let growth = ratios.last().copied().unwrap_or(f64::NAN) / ratios[0];
    let max_tail = recs.iter().map(|r| r.spectral_tail).fold(0.0, f64::max);
    let ratio_of = |r: &DiagnosticsRecord| r.grad_sq * (v0 + e * r.t * r.t) / (e * e * r.t * r.t);
    let c_fit = recs.iter().filter(|r| r.t < 0.0).map(ratio_of).fold(f64::INFINITY, f64::min);
    let c_fit_window = recs
        .iter()
        .filter(|r| r.t < 0.0 && r.t >= -0.5)
        .map(ratio_of)
        .fold(f64::INFINITY, f64::min);
    let c_star = 16.0 / defocusing_constant(1, spec.p).max(1.0);

    let mut diagnostics = Vec::new();
    let reached = (run.final_time - run.t_target).abs() <= 1e-12 * run.t_target.abs();
    if !reached {
        diagnostics.push(format!(
            "stopped at t = {} before T = {} ({} rejected steps)",
            run.final_time, run.t_target, run.steps_rejected
        ));
    }
    if run.blowup_suspected {
        diagnostics.push("step size collapsed".into());
    }
    if max_tail >= spec.tail_tol {
        diagnostics.push(format!("spectral tail reached {max_tail:.3e}"));
    }
    let inconclusive = !diagnostics.is_empty();

    let checks = vec![
        Check::new(
            "kinetic-poor start",
            ratios[0] <= spec.initial_ratio_max,
            format!("ratio(0) = {:.4e}", ratios[0]),
        ),
        Check::new(
            "ratio growth by T",
            growth >= spec.growth_factor,
            format!("{growth:.3} vs {}", spec.growth_factor),
        ),
        Check::new(
            "equipartition bound with fitted constant",
            c_fit > 0.0 && c_fit_window >= c_star,
            format!("c_fit = {c_fit:.4}, window c_fit = {c_fit_window:.4}, c* = {c_star:.4}"),
        ),
    ];
    let outcome = outcome_of(&checks, inconclusive);
    Ok(EquipartitionReport {
        spec: spec.clone(),
        dt_effective: run.dt_effective,
        energy: e,
        v0,
        t_equipartition: run.t_target,
        final_time: run.final_time,
        times: recs.iter().map(|r| r.t).collect(),
        ratios,
        growth,
        max_tail,
        c_fit,
        c_fit_window,
        c_star,
        inconclusive,
        diagnostics,
        checks,
        outcome,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusingReport {
    pub spec: EquipartitionSpec,
    pub dt_effective: f64,
    pub energy: f64,
    pub v0: f64,
    /// `-sqrt(v(0) / E)`.
    pub t_bound: f64,
    pub final_time: f64,
    pub blowup_suspected: bool,
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    /// `E^2 t^2 / (v(0) - E t^2)`.
    pub lower_bound: Vec<f64>,
    pub min_margin: f64,
    /// Largest `ratio(t) / ratio(0)` reached before termination; reported only.
    pub ratio_growth: f64,
    pub max_tail: f64,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

/// Focusing backward run that must lose resolution before `-sqrt(v(0)/E)`, with
/// `||u||^2_{H^1 dot}` above the virial lower bound until then.
pub fn run_focusing_proxy(spec: &EquipartitionSpec) -> Result<FocusingReport> {
    let run = spec.solve(1.0, |r0| {
        if !(r0.energy > 0.0) {
            return config("the focusing proxy needs positive energy");
        }
        Ok(-(r0.variance / r0.energy).sqrt())
    })?;
    let recs = &run.records;
    let r0 = &recs[0];
    let (e, v0) = (r0.energy, r0.variance);
    let lower_bound: Vec<f64> = recs
        .iter()
        .map(|r| e * e * r.t * r.t / (v0 - e * r.t * r.t))
        .collect();
    let kinetic: Vec<f64> = recs.iter().map(|r| r.grad_sq).collect();
    let min_margin = kinetic
        .iter()
        .zip(&lower_bound)
        .map(|(k, b)| k - b)
        .fold(f64::INFINITY, f64::min);
    let ratio0 = r0.equip_ratio.unwrap_or(f64::NAN);
    let ratio_growth = recs
        .iter()
        .filter_map(|r| r.equip_ratio)
        .fold(0.0, f64::max)
        / ratio0;
    let checks = vec![
        Check::new(
            "kinetic above virial bound",
            min_margin >= 0.0,
            format!("min margin {min_margin:.4e}"),
        ),
        Check::new(
            "blowup flagged before bound time",
            run.blowup_suspected && run.final_time > run.t_target,
            format!(
                "flag {}, stopped at {:.6} vs {:.6}",
                run.blowup_suspected, run.final_time, run.t_target
            ),
        ),
    ];
    let outcome = outcome_of(&checks, false);
    Ok(FocusingReport {
        spec: spec.clone(),
        dt_effective: run.dt_effective,
        energy: e,
        v0,
        t_bound: run.t_target,
        final_time: run.final_time,
        blowup_suspected: run.blowup_suspected,
        times: recs.iter().map(|r| r.t).collect(),
        kinetic,
        lower_bound,
        min_margin,
        ratio_growth,
        max_tail: recs.iter().map(|r| r.spectral_tail).fold(0.0, f64::max),
        checks,
        outcome,
    })
}
