//! Series terms of cubic one-dimensional data on sparse spectra, exact in sigma.
//!
//! In the interaction picture `W_j(t) = e^{-i gamma t Delta} Xi_j(t)` the recursion reads
//!
//! `W_j^(t, xi) = i int_0^t (2 pi)^{-1} sum e^{i gamma s Phi} E(1, Phi) W_a^ conj(W_b^) W_c^ dxi^2 ds`,
//!
//! summed over compositions `a + b + c = j - 1`. The time factor splits as
//! `e^{i gamma s xi^2}` times per-argument phases, so only `E(1, Phi)` needs the
//! product table. Time integrals use Chebyshev-Lobatto nodes. This path replaces the
//! sigma quadrature when the phases `Phi` are too large for it.

use super::closed_form::{cubic_p_max, cubic_range, cubic_scatter, phase_integral, ProductTable, SparseSpectrum};
use super::{compositions, TimeNodes};
use crate::error::{config, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Interaction-picture terms `W_j` at every time node.
#[derive(Clone, Debug)]
pub struct LatticeSeries {
    pub gamma: f64,
    pub nodes: TimeNodes,
    /// `terms[j][q]`.
    pub terms: Vec<Vec<SparseSpectrum>>,
}

impl LatticeSeries {
    /// `||Xi_j(t_q)||_{H^s}`; the interaction-picture phase does not change it.
    pub fn norm(&self, j: usize, q: usize, s: f64) -> f64 {
        self.terms[j][q].hs_norm(s)
    }

    /// `Xi_j(t_q)` with the free phase restored.
    pub fn term(&self, j: usize, q: usize) -> SparseSpectrum {
        let mut out = self.terms[j][q].clone();
        let t = self.nodes.times()[q];
        for (i, z) in out.values.iter_mut().enumerate() {
            let xi = (out.offset + i as i64) as f64 * out.dxi;
            *z *= Complex64::from_polar(1.0, -self.gamma * t * xi * xi);
        }
        out
    }
}

fn with_phase(w: &SparseSpectrum, a: f64) -> SparseSpectrum {
    let mut out = w.clone();
    for (i, z) in out.values.iter_mut().enumerate() {
        if *z != Complex64::default() {
            let xi = (out.offset + i as i64) as f64 * out.dxi;
            *z *= Complex64::from_polar(1.0, a * xi * xi);
        }
    }
    out
}

/// Builds `Xi_0 .. Xi_J` for cubic one-dimensional data `phi` on `q` nodes in `[0, t]`.
pub fn lattice_xi_series(phi: &SparseSpectrum, t: f64, j_max: usize, q: usize, gamma: f64) -> Result<LatticeSeries> {
    if j_max > super::MAX_DEPTH {
        return config(format!("series depth {j_max} exceeds {}", super::MAX_DEPTH));
    }
    let nodes = TimeNodes::new(t, q)?;
    let dxi = phi.dxi;
    let c = 2.0 * dxi * dxi;
    let pre = dxi * dxi / (2.0 * PI);
    let mut terms: Vec<Vec<SparseSpectrum>> = vec![vec![phi.clone(); nodes.len()]];
    for j in 1..=j_max {
        let comps = compositions(j - 1, 3);
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        let mut p_max = 0;
        for comp in &comps {
            let (a, b, cc) = (&terms[comp[0]][0], &terms[comp[1]][0], &terms[comp[2]][0]);
            let (l, h) = cubic_range(a, b, cc);
            lo = lo.min(l);
            hi = hi.max(h);
            p_max = p_max.max(cubic_p_max(a, b, cc));
        }
        let table = ProductTable::new(p_max, |p| phase_integral(1.0, c * p));
        let mut integrand = Vec::with_capacity(nodes.len());
        for (k, &s) in nodes.times().iter().enumerate() {
            let shifted: Vec<SparseSpectrum> = (0..j).map(|i| with_phase(&terms[i][k], -gamma * s)).collect();
            let mut acc = SparseSpectrum::zeros(dxi, lo, hi);
            for comp in &comps {
                cubic_scatter(&shifted[comp[0]], &shifted[comp[1]], &shifted[comp[2]], &table, &mut acc);
            }
            let acc = with_phase(&acc, gamma * s);
            integrand.push(acc.values);
        }
        let integrated = nodes.integrate(&integrand);
        let level = integrated
            .into_iter()
            .map(|mut v| {
                for z in v.iter_mut() {
                    *z *= Complex64::new(0.0, pre);
                }
                SparseSpectrum {
                    dxi,
                    offset: lo,
                    values: v,
                }
            })
            .collect();
        terms.push(level);
    }
    Ok(LatticeSeries { gamma, nodes, terms })
}
