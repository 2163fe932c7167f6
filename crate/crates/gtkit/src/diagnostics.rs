//! Functionals along trajectories and the virial identity checks.

use crate::error::{config, GtError, Result};
use crate::nonlinearity::{GTConfig, NonlinearOp, Variant};
use crate::spectral::{self, Field, SobolevIndex};
use serde::{Deserialize, Serialize};

/// One `H^s` norm in a record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsNorm {
    pub s: f64,
    pub value: f64,
}

/// Snapshot of every tracked functional at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// `(|gamma|/2) int |grad u|^2`.
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    pub variance: f64,
    pub vdot1: f64,
    pub hs_norms: Vec<HsNorm>,
    pub boundary_frac: f64,
    pub spectral_tail: f64,
    /// `None` when the potential vanishes.
    pub equip_ratio: Option<f64>,
    /// `||u||^2_{\dot H^1}`.
    pub grad_sq: f64,
    /// Present for the averaged-unit variant only.
    pub vdot2: Option<f64>,
    pub vddot1: Option<f64>,
}

/// Everything the virial formulas need, from one set of sigma integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VirialTerms {
    pub grad_sq: f64,
    /// `iint_0^1 |e^{i sigma Delta} u|^{p+2}`.
    pub plain: f64,
    /// `iint_0^1 sigma |e^{i sigma Delta} u|^{p+2}`.
    pub sigma_weighted: f64,
    /// `int |e^{i Delta} u|^{p+2}`.
    pub endpoint: f64,
    pub energy: f64,
    pub vdot2: f64,
    pub vddot1: f64,
    /// First line of the second-derivative formula, for the algebraic cross-check.
    pub vddot1_expanded: f64,
}

fn virial_terms_raw(op: &NonlinearOp, cfg: &GTConfig, raw: &[num_complex::Complex64]) -> VirialTerms {
    let d = cfg.d as f64;
    let p = cfg.p as f64;
    let pot = op.potential_terms(raw);
    let endpoint = op.endpoint_integral(raw, 1.0);
    let grad_sq = op.gradient_sq(raw);
    let energy = -0.5 * cfg.gamma * grad_sq + pot.plain / (p + 2.0);
    let vdot2 = 4.0 * (d * p - 4.0) / (p + 2.0) * pot.sigma_weighted + 8.0 / (p + 2.0) * endpoint;
    let vddot1 = -16.0 * energy - 4.0 * (d * p - 8.0) / (p + 2.0) * pot.plain - 16.0 / (p + 2.0) * endpoint;
    let vddot1_expanded = 8.0 * cfg.gamma * grad_sq + 4.0 * (4.0 - d * p) / (p + 2.0) * pot.plain
        - 16.0 / (p + 2.0) * endpoint;
    VirialTerms {
        grad_sq,
        plain: pot.plain,
        sigma_weighted: pot.sigma_weighted,
        endpoint,
        energy,
        vdot2,
        vddot1,
        vddot1_expanded,
    }
}

fn require_unit(cfg: &GTConfig) -> Result<()> {
    if cfg.variant != Variant::AveragedUnit {
        return config("virial formulas hold for the averaged-unit equation only");
    }
    Ok(())
}

/// All virial ingredients of `u`.
pub fn virial_terms(u: &Field, cfg: &GTConfig) -> Result<VirialTerms> {
    require_unit(cfg)?;
    let op = NonlinearOp::new(u.grid(), cfg)?;
    Ok(virial_terms_raw(&op, cfg, &u.raw_spectrum()))
}

/// `(4(dp-4)/(p+2)) iint sigma |e^{i sigma Delta}u|^{p+2} + (8/(p+2)) int |e^{i Delta}u|^{p+2}`.
pub fn vdot2(u: &Field, cfg: &GTConfig) -> Result<f64> {
    Ok(virial_terms(u, cfg)?.vdot2)
}

/// `-16E - (4(dp-8)/(p+2)) iint |e^{i sigma Delta}u|^{p+2} - (16/(p+2)) int |e^{i Delta}u|^{p+2}`.
pub fn vddot1_rhs(u: &Field, cfg: &GTConfig) -> Result<f64> {
    Ok(virial_terms(u, cfg)?.vddot1)
}

/// `||u||^2_{\dot H^1} / iint |e^{i sigma Delta} u|^{p+2}`; `None` if the denominator vanishes.
pub fn equipartition_ratio(u: &Field, cfg: &GTConfig) -> Result<Option<f64>> {
    let op = NonlinearOp::new(u.grid(), cfg)?;
    let raw = u.raw_spectrum();
    let pot = op.potential_terms(&raw).plain;
    Ok(if pot > 0.0 {
        Some(op.gradient_sq(&raw) / pot)
    } else {
        None
    })
}

/// Reusable recorder holding the nonlinearity engine for one grid.
pub struct Recorder {
    op: NonlinearOp,
    cfg: GTConfig,
    s_list: Vec<f64>,
}

impl Recorder {
    pub fn new(grid: &spectral::Grid, cfg: &GTConfig, s_list: &[f64]) -> Result<Self> {
        Ok(Recorder {
            op: NonlinearOp::new(grid, cfg)?,
            cfg: cfg.clone(),
            s_list: s_list.to_vec(),
        })
    }

    pub fn op(&self) -> &NonlinearOp {
        &self.op
    }

    pub fn record(&self, u: &Field, t: f64) -> Result<DiagnosticsRecord> {
        let raw = u.raw_spectrum();
        let p = self.cfg.p as f64;
        let (grad_sq, plain, vdot2, vddot1) = if self.cfg.variant == Variant::AveragedUnit {
            let v = virial_terms_raw(&self.op, &self.cfg, &raw);
            (v.grad_sq, v.plain, Some(v.vdot2), Some(v.vddot1))
        } else {
            (self.op.gradient_sq(&raw), self.op.potential_terms(&raw).plain, None, None)
        };
        let potential = plain / (p + 2.0);
        let mut hs_norms = Vec::with_capacity(self.s_list.len());
        for &s in &self.s_list {
            hs_norms.push(HsNorm {
                s,
                value: spectral::sobolev_norm_raw(u.grid(), &raw, SobolevIndex::inhomogeneous(s))?,
            });
        }
        Ok(DiagnosticsRecord {
            t,
            mass: spectral::mass(u),
            kinetic: 0.5 * self.cfg.gamma.abs() * grad_sq,
            potential,
            energy: -0.5 * self.cfg.gamma * grad_sq + potential,
            variance: spectral::moment_variance(u).value,
            vdot1: spectral::radial_momentum(u).value,
            hs_norms,
            boundary_frac: spectral::boundary_mass_fraction(u),
            spectral_tail: spectral::spectral_tail_fraction_raw(u.grid(), &raw),
            equip_ratio: if plain > 0.0 { Some(grad_sq / plain) } else { None },
            grad_sq,
            vdot2,
            vddot1,
        })
    }
}

/// Complete record of `u` at time `t`.
pub fn record(u: &Field, t: f64, cfg: &GTConfig, s_list: &[f64]) -> Result<DiagnosticsRecord> {
    Recorder::new(u.grid(), cfg, s_list)?.record(u, t)
}

/// Centered-difference comparison of a derivative with its claimed formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    /// Spacing of the samples used.
    pub h: f64,
    pub max_abs_error: f64,
    /// `max |formula|` over the compared points.
    pub scale: f64,
    pub rel_error: f64,
}

/// Compares `(f_{k+s} - f_{k-s}) / (2 s h)` with `g_k` at every interior sample, where
/// `s = stride`. Samples must be uniformly spaced.
pub fn centered_fd_check(times: &[f64], f: &[f64], g: &[f64], stride: usize) -> Result<FdCheck> {
    let n = times.len();
    if f.len() != n || g.len() != n {
        return Err(GtError::Mismatch("series lengths differ".into()));
    }
    if stride == 0 || n < 2 * stride + 1 {
        return config("too few samples for a centered difference");
    }
    let h = (times[stride] - times[0]) / stride as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
            return config("finite-difference checks need uniformly spaced samples");
        }
    }
    let mut max_err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut k = stride;
    while k + stride < n {
        let fd = (f[k + stride] - f[k - stride]) / (2.0 * stride as f64 * h);
        max_err = max_err.max((fd - g[k]).abs());
        scale = scale.max(g[k].abs());
        k += stride;
    }
    Ok(FdCheck {
        h: h * stride as f64,
        max_abs_error: max_err,
        scale,
        rel_error: if scale > 0.0 { max_err / scale } else { max_err },
    })
}

/// Both virial identities checked by finite differences on captured records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialFdReport {
    /// `dv/dt` against `gamma vdot1 + vdot2`.
    pub first: FdCheck,
    /// `d(vdot1)/dt` against the closed second-derivative formula.
    pub second: FdCheck,
}

/// Runs [`centered_fd_check`] on both identities with the given stride.
pub fn virial_fd_check(records: &[DiagnosticsRecord], gamma: f64, stride: usize) -> Result<VirialFdReport> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let v: Vec<f64> = records.iter().map(|r| r.variance).collect();
    let v1: Vec<f64> = records.iter().map(|r| r.vdot1).collect();
    let mut rhs1 = Vec::with_capacity(records.len());
    let mut rhs2 = Vec::with_capacity(records.len());
    for r in records {
        match (r.vdot2, r.vddot1) {
            (Some(a), Some(b)) => {
                rhs1.push(gamma * r.vdot1 + a);
                rhs2.push(b);
            }
            _ => return config("records lack virial terms (averaged-unit variant required)"),
        }
    }
    Ok(VirialFdReport {
        first: centered_fd_check(&t, &v, &rhs1, stride)?,
        second: centered_fd_check(&t, &v1, &rhs2, stride)?,
    })
}

/// Margins of the variance and momentum inequalities along a backward run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    pub focusing: bool,
    pub times: Vec<f64>,
    /// Bound minus `v(t)`; nonnegative when the inequality holds.
    pub v_margin: Vec<f64>,
    /// `vdot1(t) - (vdot1(0) - 16 E t)`.
    pub vdot1_margin: Vec<f64>,
    /// Constant in the defocusing bound used for the margins.
    pub c_defocusing: Option<f64>,
    /// Smallest constant making the defocusing bound hold at every sample.
    pub c_fit: Option<f64>,
    pub energy: f64,
    pub v0: f64,
    pub vdot1_0: f64,
}

impl VirialReport {
    /// Smallest variance margin relative to `v(0)`.
    pub fn min_v_margin_rel(&self) -> f64 {
        self.v_margin.iter().cloned().fold(f64::INFINITY, f64::min) / self.v0
    }

    pub fn min_vdot1_margin(&self) -> f64 {
        self.vdot1_margin.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `C(p, d) = 8 + 2(dp - 8)/(p + 2)`, half the bound on `-vddot1 / E` without the endpoint term.
pub fn defocusing_constant(d: usize, p: u32) -> f64 {
    let (d, p) = (d as f64, p as f64);
    8.0 + 2.0 * (d * p - 8.0) / (p + 2.0)
}

/// Checks the variance and momentum inequalities along records of a backward run
/// with `gamma = -1` (defocusing, `-1/2 <= t <= 0`) or `gamma = 1` (focusing).
pub fn virial_inequality_check(records: &[DiagnosticsRecord], cfg: &GTConfig) -> Result<VirialReport> {
    require_unit(cfg)?;
    if records.is_empty() {
        return config("no records to check");
    }
    if records.iter().any(|r| r.t > 0.0) || records[0].t != 0.0 {
        return config("virial inequalities need a backward run starting at t = 0");
    }
    if (cfg.gamma.abs() - 1.0).abs() > 1e-15 {
        return config("virial inequalities are stated for gamma = 1 or gamma = -1");
    }
    let focusing = cfg.gamma > 0.0;
    let d = cfg.d as f64;
    if !focusing && d * (cfg.p as f64) < 8.0 {
        return config("the defocusing bound needs p >= 8/d");
    }
    let r0 = &records[0];
    let (v0, w0, e) = (r0.variance, r0.vdot1, r0.energy);
    let rows: Vec<&DiagnosticsRecord> = if focusing {
        records.iter().collect()
    } else {
        records.iter().filter(|r| r.t >= -0.5).collect()
    };
    let c_defocusing = defocusing_constant(cfg.d, cfg.p);
    let mut times = Vec::new();
    let mut v_margin = Vec::new();
    let mut vdot1_margin = Vec::new();
    let mut c_fit: f64 = 0.0;
    for r in rows {
        let t = r.t;
        let bound = if focusing {
            v0 + w0 * t - 8.0 * e * t * t
        } else {
            v0 - w0 * t + c_defocusing * e * t * t
        };
        if !focusing && t != 0.0 {
            c_fit = c_fit.max((r.variance - v0 + w0 * t) / (e * t * t));
        }
        times.push(t);
        v_margin.push(bound - r.variance);
        vdot1_margin.push(r.vdot1 - (w0 - 16.0 * e * t));
    }
    Ok(VirialReport {
        focusing,
        times,
        v_margin,
        vdot1_margin,
        c_defocusing: (!focusing).then_some(c_defocusing),
        c_fit: (!focusing).then_some(c_fit),
        energy: e,
        v0,
        vdot1_0: w0,
    })
}
