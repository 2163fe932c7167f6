//! High-to-low cascade of frequency-box data for the cubic one-dimensional equation.
//!
//! Every quantity is evaluated on the sparse lattice spectrum: the first iterate by the
//! closed-form kernel and the higher terms by the exact-sigma lattice recursion. A grid
//! sigma rule at these bandwidths would need ~1e6 nodes per evaluation.
//!
//! The lattice spacing matters: trivial resonances (`Phi = 0` off the continuum's null
//! set) add a phase rotation of relative size about `(2/pi) dxi T R^2 A`, which at
//! coarse spacings swamps the higher terms.

use super::{fit_loglog, log_space, outcome_of, Check, FitResult, Outcome};
use crate::error::{config, Result};
use crate::initial_data::{snap_box, InflationParams, SnappedBox};
use crate::picard::lattice::lattice_xi_series;
use crate::picard::{series_term_bound_check, xi1_closed_form_spectrum, SparseSpectrum, TermBoundReport};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const GAMMA: f64 = -1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InflationNegSpec {
    /// Lattice spacing in frequency.
    pub dxi: f64,
    /// Grid size; bounds the highest admissible mode.
    pub n_points: usize,
    /// Base frequencies as multiples of `dxi`.
    pub n_multiples: Vec<f64>,
    pub delta: f64,
    pub s: f64,
    /// Sample times as fractions of `N^{-2}` for the time-slope fit.
    pub t_fractions: Vec<f64>,
    /// `t N^2` at which the low-frequency floor is compared across `N`.
    pub floor_fraction: f64,
    pub series_depth: usize,
    pub series_nodes: usize,
    pub tol_t_slope: f64,
    /// Relative tolerance on the `N` exponent of the low-frequency floor.
    pub tol_floor_exponent: f64,
    pub tol_norm_exponent: f64,
    pub dominance_ratio: f64,
}

impl Default for InflationNegSpec {
    fn default() -> Self {
        InflationNegSpec {
            dxi: 1.0,
            n_points: 2048,
            n_multiples: vec![64.0, 128.0, 256.0],
            delta: 0.2,
            s: -2.5,
            t_fractions: log_space(0.01, 0.1, 5),
            floor_fraction: 0.1,
            series_depth: 3,
            series_nodes: 12,
            tol_t_slope: 0.05,
            tol_floor_exponent: 0.10,
            tol_norm_exponent: 0.1,
            dominance_ratio: 0.5,
        }
    }
}

impl InflationNegSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_multiples.len() < 2 {
            return config("the N list needs at least two entries");
        }
        if !(self.s < -1.5) {
            return config("the cascade needs s < -3/2");
        }
        if !(self.s + 1.5 + 2.5 * self.delta < 0.0) {
            return config("delta must keep s + 3/2 + 5 delta / 2 negative");
        }
        if !(self.dxi > 0.0) || self.t_fractions.len() < 2 {
            return config("need a positive spacing and at least two sample times");
        }
        if self.series_depth < 2 {
            return config("dominance needs the series through Xi_2");
        }
        Ok(())
    }
}

/// The two terms bounding `|Xi_1^(t, xi)|` from below, on the low-frequency window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundTerms {
    pub t: f64,
    /// Lattice frequencies `xi` in `[0, A]`.
    pub xi: Vec<f64>,
    /// `t sum |Phi|^{-1} R^3 dxi^2 / 2 pi`.
    pub main: Vec<f64>,
    /// `t |sum e^{-i Phi} Phi^{-1}| R^3 dxi^2 / 2 pi`.
    pub oscillatory: Vec<f64>,
    pub max_ratio: f64,
    /// `min main / (t N^-2 A^2 R^3)`.
    pub main_constant: f64,
}

/// Lower-bound terms at time `t` for the snapped box, over `xi` in `[0, A_eff]`.
pub fn lower_bound_terms(b: &SnappedBox, t: f64) -> LowerBoundTerms {
    let lower: Vec<i64> = (b.n_index..b.n_index + b.a_modes).collect();
    let upper: Vec<i64> = (2 * b.n_index..2 * b.n_index + b.a_modes).collect();
    let dxi = b.dxi;
    let scale = t * b.r.powi(3) * dxi * dxi / (2.0 * PI);
    let rows: Vec<(f64, f64, f64)> = (0..=b.a_modes)
        .into_par_iter()
        .map(|k| {
            let xi = k as f64 * dxi;
            let mut main = 0.0;
            let mut osc = Complex64::default();
            for &k1 in &lower {
                for &k2 in &upper {
                    let k3 = k - k1 + k2;
                    if k3 < b.n_index || k3 >= b.n_index + b.a_modes {
                        continue;
                    }
                    let phi = -2.0 * ((k1 - k2) as f64 * dxi) * ((k1 - k) as f64 * dxi);
                    main += 1.0 / phi.abs();
                    osc += Complex64::from_polar(1.0 / phi, -phi);
                }
            }
            (xi, main * scale, osc.norm() * scale)
        })
        .collect();
    let bound = t * b.n_eff.powi(-2) * b.a_eff.powi(2) * b.r.powi(3);
    let main: Vec<f64> = rows.iter().map(|r| r.1).collect();
    LowerBoundTerms {
        t,
        xi: rows.iter().map(|r| r.0).collect(),
        max_ratio: rows.iter().map(|r| r.2 / r.1).fold(0.0, f64::max),
        main_constant: main.iter().cloned().fold(f64::INFINITY, f64::min) / bound,
        oscillatory: rows.iter().map(|r| r.2).collect(),
        main,
    }
}

/// The parameter requirements evaluated at the effective values; reported, not asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Requirements {
    /// `T R^2 A`, want `<< 1`.
    pub lwp: f64,
    /// `||phi||_{H^s}`, want `<< 1`.
    pub small_data: f64,
    /// `T N^-2 A^2 R^3`, want `>> 1`.
    pub growth: f64,
    /// `T R^2 (log A)^2`, want `<< 1`.
    pub convergence: f64,
    /// `T R^2 N^2 A^-2 (log A)^4`, want `<< 1`.
    pub dominance: f64,
    /// `A / N`, want `<< 1`.
    pub separation: f64,
    /// `T`, want `<< 1`.
    pub instantaneity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationNegPoint {
    pub multiple: f64,
    pub params: InflationParams,
    pub snapped: SnappedBox,
    /// `T = N^{-3-6 delta}` with the nominal `N`.
    pub t_final: f64,
    pub data_norm: f64,
    pub t_values: Vec<f64>,
    pub xi1_norms: Vec<f64>,
    pub t_slope: FitResult,
    pub floor_time: f64,
    /// `min |Xi_1^|` on `[0, A_eff]` at `floor_time`.
    pub floor: f64,
    /// `t N_eff^-2 A_eff^2 R^3` at `floor_time`.
    pub floor_scale: f64,
    pub lower_bound: LowerBoundTerms,
    pub requirements: Requirements,
    pub xi1_at_t_final: f64,
    /// `||Xi_j(T)||_{H^s}` for `j = 0 ..= depth`.
    pub series_norms: Vec<f64>,
    pub term_bounds: TermBoundReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationNegReport {
    pub spec: InflationNegSpec,
    pub points: Vec<InflationNegPoint>,
    pub floor_fit: FitResult,
    /// Exponent of `t N^-2 A^2 R^3` at fixed `t N^2`, from the effective values.
    pub floor_expected: f64,
    pub norm_fit: FitResult,
    pub norm_expected: f64,
    /// Largest `C_j` for `j >= 2` over all but the largest `N`.
    pub envelope_c: Option<f64>,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

fn run_point(spec: &InflationNegSpec, multiple: f64) -> Result<InflationNegPoint> {
    let n = multiple * spec.dxi;
    let params = InflationParams::from_n_delta(n, spec.delta, spec.s);
    let b = snap_box(&params, spec.dxi, spec.n_points)?;
    let phi = SparseSpectrum::from_box(&b);
    let n2 = b.n_eff.powi(-2);

    let t_values: Vec<f64> = spec.t_fractions.iter().map(|f| f * n2).collect();
    let xi1_norms: Vec<f64> = t_values
        .iter()
        .map(|&t| xi1_closed_form_spectrum(&phi, t, GAMMA).hs_norm(spec.s))
        .collect();
    let t_slope = fit_loglog(&t_values, &xi1_norms)?;

    let floor_time = spec.floor_fraction * n2;
    let floor = xi1_closed_form_spectrum(&phi, floor_time, GAMMA).min_abs_on(0.0, b.a_eff);
    let floor_scale = floor_time * n2 * b.a_eff.powi(2) * b.r.powi(3);

    let t_final = params.t_inflation();
    let data_norm = phi.hs_norm(spec.s);
    let log_a = b.a_eff.ln();
    let requirements = Requirements {
        lwp: t_final * b.r.powi(2) * b.a_eff,
        small_data: data_norm,
        growth: t_final * n2 * b.a_eff.powi(2) * b.r.powi(3),
        convergence: t_final * b.r.powi(2) * log_a.powi(2),
        dominance: t_final * b.r.powi(2) * b.n_eff.powi(2) / b.a_eff.powi(2) * log_a.powi(4),
        separation: b.a_eff / b.n_eff,
        instantaneity: t_final,
    };

    let series = lattice_xi_series(&phi, t_final, spec.series_depth, spec.series_nodes, GAMMA)?;
    let last = series.nodes.len() - 1;
    let series_norms: Vec<f64> = (0..=spec.series_depth)
        .map(|j| series.norm(j, last, spec.s))
        .collect();
    let term_bounds = series_term_bound_check(&series_norms, t_final, &b, spec.s)?;

    Ok(InflationNegPoint {
        multiple,
        params,
        snapped: b,
        t_final,
        data_norm,
        t_values,
        xi1_norms,
        t_slope,
        floor_time,
        floor,
        floor_scale,
        lower_bound: lower_bound_terms(&b, floor_time),
        requirements,
        xi1_at_t_final: series_norms[1],
        series_norms,
        term_bounds,
    })
}

/// Sweeps `N`, fitting the time slope, the low-frequency floor and the data norm.
pub fn run_inflation_negative(spec: &InflationNegSpec) -> Result<InflationNegReport> {
    spec.validate()?;
    let points = spec
        .n_multiples
        .par_iter()
        .map(|&m| run_point(spec, m))
        .collect::<Result<Vec<_>>>()?;

    let n_eff: Vec<f64> = points.iter().map(|p| p.snapped.n_eff).collect();
    let floor_fit = fit_loglog(&n_eff, &points.iter().map(|p| p.floor).collect::<Vec<_>>())?;
    let floor_expected = fit_loglog(&n_eff, &points.iter().map(|p| p.floor_scale).collect::<Vec<_>>())?.exponent;
    let norm_fit = fit_loglog(&n_eff, &points.iter().map(|p| p.data_norm).collect::<Vec<_>>())?;
    let norm_expected = spec.s + 1.5 + 2.5 * spec.delta;

    let mut checks = Vec::new();
    for p in &points {
        checks.push(Check::within(
            &format!("t-slope N={}dxi", p.multiple),
            p.t_slope.exponent,
            1.0,
            spec.tol_t_slope,
        ));
    }
    checks.push(Check::within(
        "low-frequency floor exponent",
        floor_fit.exponent,
        floor_expected,
        spec.tol_floor_exponent * floor_expected.abs(),
    ));
    checks.push(Check::within(
        "data norm exponent",
        norm_fit.exponent,
        norm_expected,
        spec.tol_norm_exponent,
    ));
    let decreasing = points.windows(2).all(|w| w[1].data_norm < w[0].data_norm);
    checks.push(Check::new("data norm decreasing", decreasing, format!("{:?}", points.iter().map(|p| p.data_norm).collect::<Vec<_>>())));
    let growing = points.windows(2).all(|w| w[1].xi1_at_t_final > w[0].xi1_at_t_final);
    checks.push(Check::new(
        "Xi_1(T) growing",
        growing,
        format!("{:?}", points.iter().map(|p| p.xi1_at_t_final).collect::<Vec<_>>()),
    ));
    let top = points.last().expect("validated nonempty");
    // The envelope constant is calibrated on the smaller N and must hold uniformly at the largest.
    let envelope_c = points[..points.len() - 1]
        .iter()
        .flat_map(|p| p.term_bounds.per_j_constant[1..].iter().cloned())
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    let higher: f64 = top.series_norms[2..].iter().sum();
    checks.push(Check::new(
        "higher terms dominated",
        higher <= spec.dominance_ratio * top.series_norms[1],
        format!("{higher:.4e} vs {} x {:.4e}", spec.dominance_ratio, top.series_norms[1]),
    ));
    checks.push(Check::new(
        "higher terms within envelope",
        envelope_c.is_some_and(|c| top.term_bounds.per_j_constant[1..].iter().all(|&k| k <= c)),
        format!(
            "largest-N constants {:?} vs calibrated {envelope_c:?}",
            &top.term_bounds.per_j_constant[1..]
        ),
    ));
    let outcome = outcome_of(&checks, false);
    Ok(InflationNegReport {
        spec: spec.clone(),
        points,
        floor_fit,
        floor_expected,
        norm_fit,
        norm_expected,
        envelope_c,
        checks,
        outcome,
    })
}
