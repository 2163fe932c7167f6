//! The sigma-averaged nonlinearity, its variants, and the energy functionals.
//!
//! For a weight table `(sigma_m, w_m)` the nonlinearity is
//! `N(u) = sum_m w_m e^{-i sigma_m Delta} [ |v_m|^p v_m ]`, `v_m = e^{i sigma_m Delta} u`.
//! The pointwise power is taken on a grid zero-padded by `ceil((p+2)/2)` per axis,
//! which removes aliasing of the degree `p+1` product. The potential energy uses the
//! same padded samples, so `N` is exactly the gradient of the discrete potential.

use crate::error::{config, GtError, Result};
use crate::spectral::{self, fft, Field, Grid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which sigma-integral the equation carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `int_0^1 ... d sigma`, the equation itself.
    AveragedUnit,
    /// `int_0^Lambda ... d sigma`.
    IntegratedInterval,
    /// `Lambda^{-1} int_0^Lambda ... d sigma`.
    AveragedInterval,
}

impl Variant {
    /// Total weight of the sigma measure on `[0, lambda]`.
    pub fn total_weight(self, lambda: f64) -> f64 {
        match self {
            Variant::IntegratedInterval => lambda,
            Variant::AveragedUnit | Variant::AveragedInterval => 1.0,
        }
    }
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Four-point Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre_4(a: f64, b: f64) -> [(f64, f64); 4] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 4];
    for i in 0..4 {
        out[i] = (mid + half * GL4_NODES[i], half * GL4_WEIGHTS[i]);
    }
    out
}

/// Node/weight table for the sigma integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// Panel count when generated by the composite rule; `None` for user tables.
    pub panels: Option<usize>,
}

impl SigmaQuadrature {
    /// Panels needed so that each resolves at most `pi` of the phase `sigma |xi_max|^2`.
    pub fn required_panels(grid: &Grid, lambda: f64) -> usize {
        ((lambda * grid.xi_max_sq() / PI).ceil() as usize).max(2)
    }

    /// `max(8, ceil(Lambda xi_max^2 / pi) * 4)`.
    pub fn required_nodes(grid: &Grid, lambda: f64) -> usize {
        4 * Self::required_panels(grid, lambda)
    }

    /// Composite four-point Gauss-Legendre on `[0, lambda]`, scaled to `total` weight.
    pub fn composite(lambda: f64, panels: usize, total: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return config(format!("sigma interval length {lambda} must be positive"));
        }
        if panels == 0 {
            return config("sigma quadrature needs at least one panel");
        }
        let h = lambda / panels as f64;
        let scale = total / lambda;
        let mut nodes = Vec::with_capacity(4 * panels);
        let mut weights = Vec::with_capacity(4 * panels);
        for k in 0..panels {
            for (x, w) in gauss_legendre_4(k as f64 * h, (k + 1) as f64 * h) {
                nodes.push(x);
                weights.push(w * scale);
            }
        }
        Ok(SigmaQuadrature {
            nodes,
            weights,
            lambda,
            panels: Some(panels),
        })
    }

    /// Default rule for a grid: the resolution rule times `refine`.
    pub fn for_grid(grid: &Grid, variant: Variant, lambda: f64, refine: usize) -> Result<Self> {
        let panels = Self::required_panels(grid, lambda) * refine.max(1);
        Self::composite(lambda, panels, variant.total_weight(lambda))
    }

    /// A user table for a general measure; only ordering and signs are checked.
    pub fn custom(nodes: Vec<f64>, weights: Vec<f64>, lambda: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return config("sigma table needs equally many nodes and weights");
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return config("sigma nodes must be strictly increasing");
        }
        if nodes[0] < 0.0 || *nodes.last().unwrap() > lambda {
            return config(format!("sigma nodes must lie in [0, {lambda}]"));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return config("sigma weights must be finite and nonnegative");
        }
        Ok(SigmaQuadrature {
            nodes,
            weights,
            lambda,
            panels: None,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Compensated sum; fine sigma rules have ~1e6 weights.
    pub fn total_weight(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &w in &self.weights {
            let t = sum + w;
            comp += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
            sum = t;
        }
        sum + comp
    }
}

/// Model parameters: dimension, power, net dispersion and sigma measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GTConfig {
    pub d: usize,
    pub p: u32,
    pub gamma: f64,
    pub variant: Variant,
    pub sigma_quad: SigmaQuadrature,
}

impl GTConfig {
    /// The equation itself on `grid` with the default sigma rule.
    pub fn new(grid: &Grid, p: u32, gamma: f64) -> Result<Self> {
        Self::with_variant(grid, p, gamma, Variant::AveragedUnit, 1.0)
    }

    /// A variant with sigma interval `[0, lambda]`.
    pub fn with_variant(grid: &Grid, p: u32, gamma: f64, variant: Variant, lambda: f64) -> Result<Self> {
        let cfg = GTConfig {
            d: grid.d(),
            p,
            gamma,
            variant,
            sigma_quad: SigmaQuadrature::for_grid(grid, variant, lambda, 1)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same model with the sigma rule refined `factor` times.
    pub fn refined(&self, grid: &Grid, factor: usize) -> Result<Self> {
        let mut c = self.clone();
        c.sigma_quad = SigmaQuadrature::for_grid(grid, self.variant, self.lambda(), factor)?;
        Ok(c)
    }

    pub fn lambda(&self) -> f64 {
        self.sigma_quad.lambda
    }

    pub fn validate(&self) -> Result<()> {
        validate_power(self.p)?;
        validate_gamma(self.gamma)?;
        if self.variant == Variant::AveragedUnit && (self.lambda() - 1.0).abs() > 1e-15 {
            return config("the averaged-unit variant integrates over [0, 1]");
        }
        if self.variant != Variant::IntegratedInterval && self.sigma_quad.panels.is_some() {
            let w = self.sigma_quad.total_weight();
            if (w - 1.0).abs() > 1e-12 {
                return config(format!("averaged sigma weights must sum to 1, got {w}"));
            }
        }
        Ok(())
    }

    /// `(s_m, s_i)` for this dimension and power.
    pub fn critical_regularities(&self) -> (f64, f64) {
        crate::initial_data::critical_regularities(self.d, self.p)
    }
}

pub fn validate_power(p: u32) -> Result<()> {
    if p < 2 || p % 2 != 0 {
        return config(format!("p must be even ≥ 2 (got {p})"));
    }
    Ok(())
}

pub fn validate_gamma(gamma: f64) -> Result<()> {
    if gamma == 0.0 || !gamma.is_finite() {
        return config("gamma must be a nonzero net dispersion");
    }
    Ok(())
}

const PHASE_CACHE_LIMIT: usize = 1 << 23;
const CHUNK: usize = 8;

/// Precomputed engine for repeated evaluations on one grid.
pub struct NonlinearOp {
    grid: Grid,
    p: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ksq: Vec<f64>,
    factor: usize,
    pdims: Vec<usize>,
    phases: Option<Vec<Vec<Complex64>>>,
}

/// The two sigma integrals of `|e^{i sigma Delta} u|^{p+2}` used by the energy and virial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialTerms {
    /// `sum_m w_m int |v_m|^{p+2}`.
    pub plain: f64,
    /// `sum_m w_m sigma_m int |v_m|^{p+2}`.
    pub sigma_weighted: f64,
}

impl NonlinearOp {
    pub fn new(grid: &Grid, cfg: &GTConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.d != grid.d() {
            return Err(GtError::Mismatch(format!(
                "config has d = {}, grid has d = {}",
                cfg.d,
                grid.d()
            )));
        }
        let q = &cfg.sigma_quad;
        if q.panels.is_some() {
            let required = SigmaQuadrature::required_nodes(grid, q.lambda);
            if q.len() < required {
                return Err(GtError::QuadratureResolution {
                    required,
                    have: q.len(),
                });
            }
        }
        let ksq = grid.ksq();
        let factor = (cfg.p as usize + 2).div_ceil(2);
        let pdims = grid.n().iter().map(|&n| n * factor).collect();
        let phases = if q.len() * grid.len() <= PHASE_CACHE_LIMIT {
            Some(
                q.nodes
                    .iter()
                    .map(|&s| ksq.iter().map(|&k| Complex64::from_polar(1.0, -s * k)).collect())
                    .collect(),
            )
        } else {
            None
        };
        Ok(NonlinearOp {
            grid: grid.clone(),
            p: cfg.p,
            nodes: q.nodes.clone(),
            weights: q.weights.clone(),
            ksq,
            factor,
            pdims,
            phases,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of padded-grid transforms per call of [`Self::apply_raw`].
    pub fn transforms_per_call(&self) -> usize {
        2 * self.nodes.len()
    }

    // e^{-i (sigma_m + shift) |xi|^2} applied to a copy of `raw`.
    fn to_node(&self, m: usize, raw: &[Complex64], shift_phase: Option<&[Complex64]>) -> Vec<Complex64> {
        let s = self.nodes[m];
        match (&self.phases, shift_phase) {
            (Some(ph), Some(sh)) => raw
                .iter()
                .zip(&ph[m])
                .zip(sh)
                .map(|((z, a), b)| z * a * b)
                .collect(),
            (Some(ph), None) => raw.iter().zip(&ph[m]).map(|(z, a)| z * a).collect(),
            (None, Some(sh)) => raw
                .iter()
                .zip(&self.ksq)
                .zip(sh)
                .map(|((z, &k), b)| z * b * Complex64::from_polar(1.0, -s * k))
                .collect(),
            (None, None) => raw
                .iter()
                .zip(&self.ksq)
                .map(|(z, &k)| z * Complex64::from_polar(1.0, -s * k))
                .collect(),
        }
    }

    fn from_node(&self, m: usize, out: &mut [Complex64], src: &[Complex64], w: f64, shift_phase: Option<&[Complex64]>) {
        let s = self.nodes[m];
        for i in 0..out.len() {
            let mut ph = match &self.phases {
                Some(p) => p[m][i].conj(),
                None => Complex64::from_polar(1.0, s * self.ksq[i]),
            };
            if let Some(sh) = shift_phase {
                ph *= sh[i].conj();
            }
            out[i] += src[i] * ph * w;
        }
    }

    /// Padded physical samples of the trigonometric interpolant of a raw spectrum.
    pub fn padded_samples(&self, raw: &[Complex64]) -> Vec<Complex64> {
        let mut big = fft::pad_spectrum(raw, self.grid.n(), self.factor);
        fft::inverse(&mut big, &self.pdims);
        let inv = 1.0 / self.grid.len() as f64;
        for z in big.iter_mut() {
            *z *= inv;
        }
        big
    }

    // Raw coarse spectrum of padded samples.
    fn coarse_spectrum(&self, mut big: Vec<Complex64>) -> Vec<Complex64> {
        fft::forward(&mut big, &self.pdims);
        let mut out = fft::truncate_spectrum(&big, &self.pdims, self.grid.n());
        let inv = 1.0 / (self.factor as f64).powi(self.grid.d() as i32);
        for z in out.iter_mut() {
            *z *= inv;
        }
        out
    }

    fn shift_phase(&self, shift: f64) -> Option<Vec<Complex64>> {
        if shift == 0.0 {
            None
        } else {
            Some(self.ksq.iter().map(|&k| Complex64::from_polar(1.0, -shift * k)).collect())
        }
    }

    // Ordered reduction over fixed node chunks; identical for any worker count.
    fn reduce_nodes<F>(&self, per_node: F) -> Vec<Complex64>
    where
        F: Fn(usize, &mut [Complex64]) + Sync,
    {
        let m = self.nodes.len();
        let chunks: Vec<usize> = (0..m.div_ceil(CHUNK)).collect();
        let partial: Vec<Vec<Complex64>> = chunks
            .par_iter()
            .map(|&c| {
                let mut acc = vec![Complex64::default(); self.grid.len()];
                for node in c * CHUNK..((c + 1) * CHUNK).min(m) {
                    per_node(node, &mut acc);
                }
                acc
            })
            .collect();
        let mut out = vec![Complex64::default(); self.grid.len()];
        for part in partial {
            for (o, z) in out.iter_mut().zip(part) {
                *o += z;
            }
        }
        out
    }

    /// Raw spectrum of `e^{-i a Delta} N(e^{i a Delta} u)` from the raw spectrum of `u`.
    ///
    /// With `a = gamma t` this is the interaction-picture right-hand side.
    pub fn apply_raw(&self, raw: &[Complex64], shift: f64) -> Vec<Complex64> {
        let sh = self.shift_phase(shift);
        let half = (self.p / 2) as i32;
        self.reduce_nodes(|m, acc| {
            let v = self.to_node(m, raw, sh.as_deref());
            let mut big = self.padded_samples(&v);
            for z in big.iter_mut() {
                *z *= z.norm_sqr().powi(half);
            }
            let g = self.coarse_spectrum(big);
            self.from_node(m, acc, &g, self.weights[m], sh.as_deref());
        })
    }

    /// `e^{-i tau Delta}[|v|^p v]`, `v = e^{i tau Delta} u`, at a single sigma value.
    pub fn pointwise_raw(&self, raw: &[Complex64], tau: f64) -> Vec<Complex64> {
        let mut v = raw.to_vec();
        spectral::propagate_raw(&mut v, &self.ksq, tau);
        let mut big = self.padded_samples(&v);
        let half = (self.p / 2) as i32;
        for z in big.iter_mut() {
            *z *= z.norm_sqr().powi(half);
        }
        let mut g = self.coarse_spectrum(big);
        spectral::propagate_raw(&mut g, &self.ksq, -tau);
        g
    }

    /// Multilinear version of [`Self::apply_raw`]: the pointwise product
    /// `v_0 conj(v_1) v_2 conj(v_3) ...` replaces `|v|^p v`.
    pub fn multilinear_raw(&self, slots: &[&[Complex64]], shift: f64) -> Result<Vec<Complex64>> {
        if slots.len() != self.p as usize + 1 {
            return Err(GtError::Mismatch(format!(
                "expected {} arguments, got {}",
                self.p + 1,
                slots.len()
            )));
        }
        let sh = self.shift_phase(shift);
        Ok(self.reduce_nodes(|m, acc| {
            let mut prod: Option<Vec<Complex64>> = None;
            for (j, slot) in slots.iter().enumerate() {
                let v = self.to_node(m, slot, sh.as_deref());
                let mut big = self.padded_samples(&v);
                if j % 2 == 1 {
                    for z in big.iter_mut() {
                        *z = z.conj();
                    }
                }
                prod = Some(match prod {
                    None => big,
                    Some(mut p) => {
                        for (a, b) in p.iter_mut().zip(&big) {
                            *a *= b;
                        }
                        p
                    }
                });
            }
            let g = self.coarse_spectrum(prod.unwrap());
            self.from_node(m, acc, &g, self.weights[m], sh.as_deref());
        }))
    }

    fn padded_power_integral(&self, raw: &[Complex64], a: f64) -> f64 {
        let mut v = raw.to_vec();
        spectral::propagate_raw(&mut v, &self.ksq, a);
        let big = self.padded_samples(&v);
        let q = (self.p / 2 + 1) as i32;
        let sum: f64 = big.iter().map(|z| z.norm_sqr().powi(q)).sum();
        sum * self.grid.cell_volume() / (self.factor as f64).powi(self.grid.d() as i32)
    }

    /// `int |e^{i a Delta} u|^{p+2} dx` on the padded grid.
    pub fn endpoint_integral(&self, raw: &[Complex64], a: f64) -> f64 {
        self.padded_power_integral(raw, a)
    }

    /// Both sigma integrals of `|e^{i sigma Delta} u|^{p+2}` in one pass.
    pub fn potential_terms(&self, raw: &[Complex64]) -> PotentialTerms {
        let vals: Vec<f64> = (0..self.nodes.len())
            .into_par_iter()
            .map(|m| self.padded_power_integral(raw, self.nodes[m]))
            .collect();
        let mut plain = 0.0;
        let mut sigma_weighted = 0.0;
        for (m, v) in vals.iter().enumerate() {
            plain += self.weights[m] * v;
            sigma_weighted += self.weights[m] * self.nodes[m] * v;
        }
        PotentialTerms { plain, sigma_weighted }
    }

    /// `int |grad u|^2` from a raw spectrum.
    pub fn gradient_sq(&self, raw: &[Complex64]) -> f64 {
        let s: f64 = raw.iter().zip(&self.ksq).map(|(z, &k)| k * z.norm_sqr()).sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }
}

/// `sum_m w_m e^{-i sigma_m Delta}[|e^{i sigma_m Delta} u|^p e^{i sigma_m Delta} u]`.
pub fn gt_nonlinearity(u: &Field, cfg: &GTConfig) -> Result<Field> {
    let op = NonlinearOp::new(u.grid(), cfg)?;
    let out = op.apply_raw(&u.raw_spectrum(), 0.0);
    Field::new(u.grid().clone(), Field::from_raw_spectrum(u.grid(), out).into_values())
}

/// `(1/(p+2)) sum_m w_m int |e^{i sigma_m Delta} u|^{p+2} dx`.
pub fn potential_energy(u: &Field, cfg: &GTConfig) -> Result<f64> {
    let op = NonlinearOp::new(u.grid(), cfg)?;
    Ok(op.potential_terms(&u.raw_spectrum()).plain / (cfg.p as f64 + 2.0))
}

/// `-(gamma/2) int |grad u|^2 + potential_energy`.
pub fn energy(u: &Field, cfg: &GTConfig) -> Result<f64> {
    let op = NonlinearOp::new(u.grid(), cfg)?;
    let raw = u.raw_spectrum();
    let pot = op.potential_terms(&raw).plain / (cfg.p as f64 + 2.0);
    Ok(-0.5 * cfg.gamma * op.gradient_sq(&raw) + pot)
}

/// `||u||_{L^2}^2`.
pub fn mass(u: &Field) -> f64 {
    spectral::mass(u)
}
