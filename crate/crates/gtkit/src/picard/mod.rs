//! Power-series expansion of the data-to-solution map.
//!
//! `Xi_0 = L u0 = e^{i gamma t Delta} u0` and
//! `Xi_j = sum_{j_0 + ... + j_p = j - 1} N_p(Xi_{j_0}, ..., Xi_{j_p})` with
//! `N_p(f_0, ..., f_p)(t) = i int_0^t e^{i gamma (t-s) Delta} int e^{-i sigma Delta}[prod_k g_k] d sigma ds`,
//! `g_k = e^{i sigma Delta} f_k(s)`, conjugated for odd `k`.
//!
//! The generic path samples time on Chebyshev-Lobatto nodes and works in the interaction
//! picture `e^{-i gamma t Delta} Xi_j(t)`, where the integrands are smooth in time.
//! [`closed_form`] and [`lattice`] hold exact-in-sigma paths for cubic one-dimensional
//! data on sparse spectra, and [`tau`] a first-iterate path for long times.

pub mod closed_form;
pub mod lattice;
pub mod tau;

mod nodes;

pub use closed_form::{xi1_closed_form, xi1_closed_form_spectrum, SparseSpectrum};
pub use nodes::TimeNodes;

use crate::error::{config, GtError, Result};
use crate::initial_data::SnappedBox;
use crate::nonlinearity::{GTConfig, NonlinearOp};
use crate::spectral::{self, Field, SobolevIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// `e^{i gamma t_q Delta} u0` at every node.
pub fn apply_l(u0: &Field, nodes: &TimeNodes, cfg: &GTConfig) -> Vec<Field> {
    nodes
        .times()
        .iter()
        .map(|&t| spectral::free_propagate(u0, t, cfg.gamma))
        .collect()
}

/// Reusable engine for [`apply_np`] on one grid and node set.
pub struct NpEngine<'a> {
    op: NonlinearOp,
    nodes: &'a TimeNodes,
    gamma: f64,
}

impl<'a> NpEngine<'a> {
    pub fn new(grid: &spectral::Grid, nodes: &'a TimeNodes, cfg: &GTConfig) -> Result<Self> {
        Ok(NpEngine {
            op: NonlinearOp::new(grid, cfg)?,
            nodes,
            gamma: cfg.gamma,
        })
    }

    /// `N_p` on interaction-picture raw spectra: input and output are
    /// `e^{-i gamma t_q Delta} f(t_q)` for every node.
    pub fn apply_ip(&self, slots: &[&[Vec<Complex64>]]) -> Result<Vec<Vec<Complex64>>> {
        let q = self.nodes.len();
        if slots.iter().any(|s| s.len() != q) {
            return Err(GtError::Mismatch("argument sampled on a different node set".into()));
        }
        let mut integrand = Vec::with_capacity(q);
        for (k, &t) in self.nodes.times().iter().enumerate() {
            let args: Vec<&[Complex64]> = slots.iter().map(|s| s[k].as_slice()).collect();
            integrand.push(self.op.multilinear_raw(&args, self.gamma * t)?);
        }
        let mut out = self.nodes.integrate(&integrand);
        for v in out.iter_mut() {
            for z in v.iter_mut() {
                *z *= Complex64::i();
            }
        }
        Ok(out)
    }

    fn to_ip(&self, f: &[Field]) -> Vec<Vec<Complex64>> {
        f.iter()
            .zip(self.nodes.times())
            .map(|(u, &t)| {
                let mut r = u.raw_spectrum();
                spectral::propagate_raw(&mut r, self.op.ksq(), -self.gamma * t);
                r
            })
            .collect()
    }

    fn from_ip(&self, w: Vec<Vec<Complex64>>) -> Vec<Field> {
        w.into_iter()
            .zip(self.nodes.times())
            .map(|(mut r, &t)| {
                spectral::propagate_raw(&mut r, self.op.ksq(), self.gamma * t);
                Field::from_raw_spectrum(self.op.grid(), r)
            })
            .collect()
    }
}

/// `N_p(f_0, ..., f_p)` at every node; each argument is sampled at every node.
pub fn apply_np(args: &[&[Field]], nodes: &TimeNodes, cfg: &GTConfig) -> Result<Vec<Field>> {
    let first = args
        .first()
        .and_then(|a| a.first())
        .ok_or_else(|| GtError::Mismatch("no arguments".into()))?;
    let grid = first.grid().clone();
    for a in args {
        if a.len() != nodes.len() {
            return Err(GtError::Mismatch("argument sampled on a different node set".into()));
        }
        for f in a.iter() {
            f.check_same(first)?;
        }
    }
    let eng = NpEngine::new(&grid, nodes, cfg)?;
    let ip: Vec<Vec<Vec<Complex64>>> = args.iter().map(|a| eng.to_ip(a)).collect();
    let slots: Vec<&[Vec<Complex64>]> = ip.iter().map(|v| v.as_slice()).collect();
    Ok(eng.from_ip(eng.apply_ip(&slots)?))
}

/// Terms `Xi_0 .. Xi_J` sampled on time nodes.
#[derive(Clone, Debug)]
pub struct PicardSeries {
    pub u0: Field,
    pub cfg: GTConfig,
    pub nodes: TimeNodes,
    /// `terms[j][q] = Xi_j(t_q)`.
    pub terms: Vec<Vec<Field>>,
    /// `max_q ||Xi_j(t_q)||_{H^s}` with `s = norm_index`.
    pub term_norms: Vec<f64>,
    pub norm_index: f64,
    /// Set when the data lie outside the small-data regime.
    pub warning: Option<String>,
}

impl PicardSeries {
    pub fn depth(&self) -> usize {
        self.terms.len() - 1
    }

    /// `max_q ||Xi_j(t_q)||_{H^s}` for each `j`.
    pub fn norms_at(&self, s: f64) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|term| {
                term.iter().try_fold(0.0f64, |m, f| {
                    Ok(m.max(spectral::sobolev_norm(f, SobolevIndex::inhomogeneous(s))?))
                })
            })
            .collect()
    }
}

pub const MAX_DEPTH: usize = 8;

/// Builds `Xi_0 .. Xi_J` on `q` Chebyshev-Lobatto nodes in `[0, t]`.
pub fn xi_series(u0: &Field, t: f64, j_max: usize, q: usize, cfg: &GTConfig) -> Result<PicardSeries> {
    if j_max > MAX_DEPTH {
        return config(format!("series depth {j_max} exceeds {MAX_DEPTH}"));
    }
    let nodes = TimeNodes::new(t, q)?;
    let grid = u0.grid().clone();
    let eng = NpEngine::new(&grid, &nodes, cfg)?;
    let s_norm = cfg.critical_regularities().0.max(0.0);
    let size = spectral::sobolev_norm(u0, SobolevIndex::inhomogeneous(s_norm))?;
    let regime = t.abs() * size.powi(cfg.p as i32);
    let warning = (regime > 0.5).then(|| {
        format!("|T| ||u0||^p = {regime:.3e} exceeds 0.5; the series may not converge")
    });

    let w0 = u0.raw_spectrum();
    let mut ip: Vec<Vec<Vec<Complex64>>> = vec![vec![w0; nodes.len()]];
    for j in 1..=j_max {
        let mut acc: Option<Vec<Vec<Complex64>>> = None;
        for comp in compositions(j - 1, cfg.p as usize + 1) {
            let slots: Vec<&[Vec<Complex64>]> = comp.iter().map(|&k| ip[k].as_slice()).collect();
            let term = eng.apply_ip(&slots)?;
            acc = Some(match acc {
                None => term,
                Some(mut a) => {
                    for (x, y) in a.iter_mut().zip(&term) {
                        for (u, v) in x.iter_mut().zip(y) {
                            *u += v;
                        }
                    }
                    a
                }
            });
        }
        ip.push(acc.expect("at least one composition"));
    }
    let terms: Vec<Vec<Field>> = ip.into_iter().map(|w| eng.from_ip(w)).collect();
    let mut series = PicardSeries {
        u0: u0.clone(),
        cfg: cfg.clone(),
        nodes,
        terms,
        term_norms: Vec::new(),
        norm_index: s_norm,
        warning,
    };
    series.term_norms = series.norms_at(s_norm)?;
    Ok(series)
}

/// Partial sum of a series at one time.
#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub field: Field,
    /// `||Xi_J(t)||_{L^2} / (1 - ratio)`.
    pub error_estimate: f64,
    /// `||Xi_J|| / ||Xi_{J-1}||` in the series norm; `None` for `J = 0`.
    pub ratio: Option<f64>,
    pub divergent: bool,
}

/// `sum_{j <= J} Xi_j(t)` by barycentric interpolation of the interaction-picture terms.
pub fn sum_series(series: &PicardSeries, t: f64) -> Result<SeriesSum> {
    let nodes = &series.nodes;
    if !nodes.contains(t) {
        return config(format!("t = {t} lies outside the series horizon [0, {}]", nodes.horizon()));
    }
    let grid = series.u0.grid().clone();
    let ksq = grid.ksq();
    let g = series.cfg.gamma;
    let weights = nodes.interpolation_weights(t);
    let mut total = vec![Complex64::default(); grid.len()];
    let mut last = vec![Complex64::default(); grid.len()];
    for (j, term) in series.terms.iter().enumerate() {
        let mut at_t = vec![Complex64::default(); grid.len()];
        for (f, (&w, &tq)) in term.iter().zip(weights.iter().zip(nodes.times())) {
            if w == 0.0 {
                continue;
            }
            let mut r = f.raw_spectrum();
            spectral::propagate_raw(&mut r, &ksq, -g * tq);
            for (a, b) in at_t.iter_mut().zip(&r) {
                *a += b * w;
            }
        }
        for (a, b) in total.iter_mut().zip(&at_t) {
            *a += b;
        }
        if j == series.depth() {
            last = at_t;
        }
    }
    spectral::propagate_raw(&mut total, &ksq, g * t);
    let scale = grid.cell_volume() / grid.len() as f64;
    let last_norm = (last.iter().map(|z| z.norm_sqr()).sum::<f64>() * scale).sqrt();
    let n = &series.term_norms;
    let ratio = (n.len() >= 2).then(|| {
        let (a, b) = (n[n.len() - 1], n[n.len() - 2]);
        if b > 0.0 {
            a / b
        } else {
            0.0
        }
    });
    let divergent = ratio.is_some_and(|r| r >= 1.0);
    let error_estimate = match ratio {
        Some(r) if r < 1.0 => last_norm / (1.0 - r),
        Some(_) => f64::INFINITY,
        None => last_norm,
    };
    Ok(SeriesSum {
        field: Field::from_raw_spectrum(&grid, total),
        error_estimate,
        ratio,
        divergent,
    })
}

/// Per-term constants of the envelope `||Xi_j|| <= (C T)^j ||u0||^{jp+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricDecay {
    /// Norm index of the series.
    pub s: f64,
    /// `(||Xi_j|| / ||u0||^{jp+1})^{1/j} / T` for `j >= 1`.
    pub per_j_constant: Vec<f64>,
    /// `max / min` of the per-`j` constants.
    pub stability: f64,
}

pub fn geometric_decay(series: &PicardSeries) -> Result<GeometricDecay> {
    if series.depth() < 2 {
        return config("need terms up to at least Xi_2");
    }
    let t = series.nodes.horizon().abs();
    let n0 = spectral::sobolev_norm(&series.u0, SobolevIndex::inhomogeneous(series.norm_index))?;
    if !(t > 0.0 && n0 > 0.0) {
        return config("geometric decay needs nonzero data and horizon");
    }
    let p = series.cfg.p as f64;
    let per_j: Vec<f64> = (1..=series.depth())
        .map(|j| {
            let jf = j as f64;
            (series.term_norms[j] / n0.powf(jf * p + 1.0)).powf(1.0 / jf) / t
        })
        .collect();
    let max = per_j.iter().cloned().fold(0.0, f64::max);
    let min = per_j.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GeometricDecay {
        s: series.norm_index,
        stability: max / min,
        per_j_constant: per_j,
    })
}

/// Per-term comparison with the envelope `C^j t^j R^{2j+1} (log A)^{2j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermBoundReport {
    pub t: f64,
    pub s: f64,
    pub norms: Vec<f64>,
    /// `(||Xi_j|| / (t^j R^{2j+1} (log A)^{2j}))^{1/j}` for `j >= 1`.
    pub per_j_constant: Vec<f64>,
    /// Least-squares `log C` through the origin of `log(norm_j / envelope_j) = j log C`.
    pub fitted_c: f64,
    /// `max / min` of the per-`j` constants.
    pub stability: f64,
    /// `sum_{j >= 2} ||Xi_j|| <= 0.5 ||Xi_1||`.
    pub dominance: bool,
    pub stable: bool,
}

/// Fits the term envelope on box data from per-term `H^s` norms at time `t`.
pub fn series_term_bound_check(norms: &[f64], t: f64, b: &SnappedBox, s: f64) -> Result<TermBoundReport> {
    if norms.len() < 3 {
        return config("need at least Xi_0, Xi_1 and Xi_2");
    }
    let log_a = b.a_eff.ln();
    if !(log_a > 0.0) {
        return config("box width must exceed 1 for the logarithmic envelope");
    }
    let env = |j: usize| t.abs().powi(j as i32) * b.r.powi(2 * j as i32 + 1) * log_a.powi(2 * j as i32);
    let per_j: Vec<f64> = (1..norms.len())
        .map(|j| (norms[j] / env(j)).powf(1.0 / j as f64))
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..norms.len() {
        let jf = j as f64;
        num += jf * (norms[j] / env(j)).ln();
        den += jf * jf;
    }
    let fitted_c = (num / den).exp();
    let max = per_j.iter().cloned().fold(0.0, f64::max);
    let min = per_j.iter().cloned().fold(f64::INFINITY, f64::min);
    let stability = max / min;
    let higher: f64 = norms[2..].iter().sum();
    Ok(TermBoundReport {
        t,
        s,
        norms: norms.to_vec(),
        per_j_constant: per_j,
        fitted_c,
        stability,
        dominance: higher <= 0.5 * norms[1],
        stable: stability <= 3.0,
    })
}
