//! Interaction-picture RK4 integration, forward or backward in time.
//!
//! The linear flow is applied exactly. Within one step the variable
//! `w(tau) = e^{-i gamma (tau - t) Delta} u(tau)` obeys
//! `w' = i e^{-i gamma (tau - t) Delta} N(e^{i gamma (tau - t) Delta} w)`, which RK4 integrates.
//! Base steps are split into dyadic substeps when the step-size test fails, so captures
//! stay on the uniform base grid.

use crate::diagnostics::{DiagnosticsRecord, Recorder};
use crate::error::{config, GtError, Result};
use crate::nonlinearity::{GTConfig, NonlinearOp};
use crate::spectral::{self, Field, Grid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Time-stepping controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    /// Signed base step.
    pub dt: f64,
    /// Signed final time.
    pub t_final: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Capture a snapshot every this many base steps (the final time is always captured).
    #[serde(default = "default_capture")]
    pub capture_every: usize,
    /// Reject a substep whose result has more than this fraction of its mass in the top
    /// third of the band.
    #[serde(default)]
    pub tail_tol: Option<f64>,
    /// Sobolev indices recorded at each capture.
    #[serde(default)]
    pub s_list: Vec<f64>,
    /// Compute a diagnostics record at each capture.
    #[serde(default = "default_true")]
    pub record: bool,
}

fn default_safety() -> f64 {
    0.1
}

fn default_capture() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl SolverParams {
    pub fn new(dt: f64, t_final: f64) -> Self {
        SolverParams {
            dt,
            t_final,
            safety: default_safety(),
            capture_every: default_capture(),
            tail_tol: None,
            s_list: Vec::new(),
            record: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return config("dt must be finite and nonzero");
        }
        if !self.t_final.is_finite() || (self.t_final != 0.0 && self.t_final.signum() != self.dt.signum()) {
            return config("dt and t_final must have the same sign");
        }
        if !(self.safety > 0.0) {
            return config("safety factor must be positive");
        }
        if self.capture_every == 0 {
            return config("capture_every must be at least 1");
        }
        Ok(())
    }

    /// Number of base steps and the step that lands exactly on `t_final`.
    pub fn base_steps(&self) -> (usize, f64) {
        let n = ((self.t_final / self.dt) - 1e-9).ceil().max(0.0) as usize;
        if n == 0 {
            (0, self.dt)
        } else {
            (n, self.t_final / n as f64)
        }
    }
}

/// A captured solution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// Empty when recording is switched off.
    pub records: Vec<DiagnosticsRecord>,
    pub blowup_suspected: bool,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Base step actually used.
    pub dt: f64,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn final_state(&self) -> &Field {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial time")
    }
}

/// Largest step allowed by `|dt| (||u||_inf^p + 1) <= safety`.
pub fn max_stable_step(u: &Field, p: u32, safety: f64) -> f64 {
    safety / (u.max_abs().powi(p as i32) + 1.0)
}

struct Stepper {
    op: NonlinearOp,
    gamma: f64,
}

impl Stepper {
    fn new(grid: &Grid, cfg: &GTConfig) -> Result<Self> {
        Ok(Stepper {
            op: NonlinearOp::new(grid, cfg)?,
            gamma: cfg.gamma,
        })
    }

    fn rhs(&self, w: &[Complex64], shift: f64) -> Vec<Complex64> {
        let mut out = self.op.apply_raw(w, shift);
        for z in out.iter_mut() {
            *z *= Complex64::i();
        }
        out
    }

    // One RK4 step on a raw spectrum.
    fn step_raw(&self, u: &[Complex64], h: f64) -> Vec<Complex64> {
        let g = self.gamma;
        let axpy = |a: &[Complex64], s: f64, b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * s).collect()
        };
        let k1 = self.rhs(u, 0.0);
        let k2 = self.rhs(&axpy(u, 0.5 * h, &k1), 0.5 * g * h);
        let k3 = self.rhs(&axpy(u, 0.5 * h, &k2), 0.5 * g * h);
        let k4 = self.rhs(&axpy(u, h, &k3), g * h);
        let mut w: Vec<Complex64> = (0..u.len())
            .map(|i| u[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect();
        spectral::propagate_raw(&mut w, self.op.ksq(), g * h);
        w
    }
}

/// One RK4 step of size `dt` from time `t`; rejected if it violates the step-size test.
pub fn step(u: &Field, t: f64, dt: f64, cfg: &GTConfig) -> Result<Field> {
    step_with_safety(u, t, dt, cfg, default_safety())
}

/// [`step`] with an explicit safety factor.
pub fn step_with_safety(u: &Field, _t: f64, dt: f64, cfg: &GTConfig, safety: f64) -> Result<Field> {
    let required = max_stable_step(u, cfg.p, safety);
    if dt.abs() > required {
        return Err(GtError::StepRejected { dt, required });
    }
    let stepper = Stepper::new(u.grid(), cfg)?;
    let raw = stepper.step_raw(&u.raw_spectrum(), dt);
    Field::new(u.grid().clone(), Field::from_raw_spectrum(u.grid(), raw).into_values())
}

fn finite(raw: &[Complex64]) -> bool {
    raw.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates from `u0` at `t = 0` to `params.t_final`.
///
/// Stops early with `blowup_suspected` when a substep would drop below `|dt| 1e-6`.
pub fn evolve(u0: &Field, params: &SolverParams, cfg: &GTConfig) -> Result<Trajectory> {
    params.validate()?;
    let grid = u0.grid().clone();
    let stepper = Stepper::new(&grid, cfg)?;
    let recorder = if params.record {
        Some(Recorder::new(&grid, cfg, &params.s_list)?)
    } else {
        None
    };
    let (n_steps, dt) = params.base_steps();
    let h_min = params.dt.abs() * 1e-6;

    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![u0.clone()],
        records: Vec::new(),
        blowup_suspected: false,
        steps_accepted: 0,
        steps_rejected: 0,
        dt,
    };
    if let Some(r) = &recorder {
        traj.records.push(r.record(u0, 0.0)?);
    }

    let mut raw = u0.raw_spectrum();
    let mut u = u0.clone();
    'outer: for k in 1..=n_steps {
        let mut level = 0u32;
        let mut done = 0usize;
        while done < (1usize << level) {
            let h = dt / (1u64 << level) as f64;
            if h.abs() < h_min {
                traj.blowup_suspected = true;
                // Keep the last accepted state so diagnostics run up to the collapse.
                let t = (k - 1) as f64 * dt + done as f64 * h;
                if t != *traj.times.last().expect("initial time present") {
                    if let Some(r) = &recorder {
                        traj.records.push(r.record(&u, t)?);
                    }
                    traj.times.push(t);
                    traj.snapshots.push(u.clone());
                }
                break 'outer;
            }
            if h.abs() > max_stable_step(&u, cfg.p, params.safety) {
                traj.steps_rejected += 1;
                level += 1;
                done *= 2;
                continue;
            }
            let next = stepper.step_raw(&raw, h);
            let tail_bad = params
                .tail_tol
                .is_some_and(|tol| spectral::spectral_tail_fraction_raw(&grid, &next) > tol);
            if !finite(&next) || tail_bad {
                traj.steps_rejected += 1;
                level += 1;
                done *= 2;
                continue;
            }
            raw = next;
            u = Field::from_raw_spectrum(&grid, raw.clone());
            traj.steps_accepted += 1;
            done += 1;
        }
        if k % params.capture_every == 0 || k == n_steps {
            let t = if k == n_steps { params.t_final } else { k as f64 * dt };
            if let Some(r) = &recorder {
                traj.records.push(r.record(&u, t)?);
            }
            traj.times.push(t);
            traj.snapshots.push(u.clone());
        }
    }
    Ok(traj)
}

/// Per-capture Duhamel residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Set when there are too few captures for the degree-5 interpolation.
    pub warning: Option<String>,
}

/// Weights `int_{t_j}^{t_{j+1}} l_m(s) ds` of the Lagrange basis on `stencil`.
fn interval_weights(stencil: &[f64], a: f64, b: f64) -> Vec<f64> {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = vec![0.0; stencil.len()];
    for q in 0..3 {
        let s = mid + half * X[q];
        for (m, o) in out.iter_mut().enumerate() {
            let mut l = 1.0;
            for (j, &tj) in stencil.iter().enumerate() {
                if j != m {
                    l *= (s - tj) / (stencil[m] - tj);
                }
            }
            *o += half * W[q] * l;
        }
    }
    out
}

/// `max_t ||e^{-i gamma t Delta} u(t) - u_0 - i int_0^t e^{-i gamma s Delta} N(u(s)) ds||_{L^2}`.
///
/// Equivalent to the usual Duhamel residual since the propagator is unitary. The
/// nonlinearity is the one described by `cfg`, which may be a variant.
pub fn duhamel_residual(traj: &Trajectory, cfg: &GTConfig) -> Result<f64> {
    Ok(duhamel_report(traj, cfg)?.max_residual)
}

/// [`duhamel_residual`] with the residual at every capture.
pub fn duhamel_report(traj: &Trajectory, cfg: &GTConfig) -> Result<DuhamelReport> {
    let grid = traj.grid().clone();
    let op = NonlinearOp::new(&grid, cfg)?;
    let ksq = grid.ksq();
    let n = traj.times.len();
    let g = cfg.gamma;

    let pulled: Vec<Vec<Complex64>> = traj
        .snapshots
        .iter()
        .zip(&traj.times)
        .map(|(u, &t)| {
            let mut r = u.raw_spectrum();
            spectral::propagate_raw(&mut r, &ksq, -g * t);
            r
        })
        .collect();
    let forcing: Vec<Vec<Complex64>> = pulled
        .iter()
        .zip(&traj.times)
        .map(|(w, &t)| op.apply_raw(w, g * t))
        .collect();

    let deg = 5.min(n.saturating_sub(1));
    let warning = (n < 6).then(|| format!("only {n} captures; time interpolation degraded to degree {deg}"));
    let norm_scale = grid.cell_volume() / grid.len() as f64;
    let mut integral = vec![Complex64::default(); grid.len()];
    let mut residuals = vec![0.0; n];
    for j in 0..n {
        if j > 0 {
            let lo = (j - 1).saturating_sub(deg / 2).min(n - 1 - deg);
            let stencil = &traj.times[lo..=lo + deg];
            let w = interval_weights(stencil, traj.times[j - 1], traj.times[j]);
            for (m, wm) in w.iter().enumerate() {
                for (acc, f) in integral.iter_mut().zip(&forcing[lo + m]) {
                    *acc += f * *wm;
                }
            }
        }
        let mut s = 0.0;
        for i in 0..grid.len() {
            let r = pulled[j][i] - pulled[0][i] - Complex64::i() * integral[i];
            s += r.norm_sqr();
        }
        residuals[j] = (s * norm_scale).sqrt();
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(DuhamelReport {
        times: traj.times.clone(),
        residuals,
        max_residual,
        warning,
    })
}
