//! First iterate through a single oscillatory integral.
//!
//! With `H(tau) = e^{-i tau Delta}[|v|^p v]`, `v = e^{i tau Delta} u0`, the interaction
//! picture forcing is `G(s) = c int_0^Lambda H(sigma + gamma s) d sigma`, `c` the sigma density.
//! Writing `I = int_0 H` and `J = int_0 I`,
//!
//! `int_0^t G = (c / gamma) [J(gamma t + Lambda) - J(Lambda) - J(gamma t) + J(0)]`,
//!
//! so one pass of composite Gauss-Legendre in `tau` gives `Xi_1` at any number of times.
//! Cost grows with the phase bound, not with `t` times the phase bound squared.

use crate::error::{config, Result};
use crate::nonlinearity::{gauss_legendre_4, GTConfig, NonlinearOp};
use crate::spectral::{self, Field};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest `|xi|` carrying a coefficient above `1e-14` of the peak.
pub fn data_bandwidth(u: &Field) -> f64 {
    let raw = u.raw_spectrum();
    let peak = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ksq = u.grid().ksq();
    raw.iter()
        .zip(&ksq)
        .filter(|(z, _)| z.norm() > 1e-14 * peak)
        .map(|(_, &k)| k.sqrt())
        .fold(0.0, f64::max)
}

/// Bound on `|xi^2 - sum +-xi_j^2|` over interactions of `u` landing on the grid.
pub fn phase_bound(u: &Field, p: u32) -> f64 {
    let b = data_bandwidth(u);
    let out = u.grid().xi_max_sq().sqrt().min((p as f64 + 1.0) * b);
    out * out + (p as f64 / 2.0 + 1.0) * b * b
}

/// `Xi_1(t)` for every `t` in `times` (all of one sign).
///
/// Panels in `tau` carry at most `phase_per_panel` radians of the phase bound.
pub fn xi1_tau(u0: &Field, times: &[f64], cfg: &GTConfig, phase_per_panel: f64) -> Result<Vec<Field>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if !(phase_per_panel > 0.0) {
        return config("phase per panel must be positive");
    }
    let grid = u0.grid().clone();
    let op = NonlinearOp::new(&grid, cfg)?;
    let lambda = cfg.lambda();
    let density = cfg.variant.total_weight(lambda) / lambda;
    let g = cfg.gamma;
    let h_max = phase_per_panel / phase_bound(u0, cfg.p).max(1e-300);
    let raw0 = u0.raw_spectrum();

    // Breakpoints where J is needed, grouped by side of zero.
    let mut pts: Vec<f64> = vec![lambda];
    for &t in times {
        pts.push(g * t);
        pts.push(g * t + lambda);
    }
    let mut pos: Vec<f64> = pts.iter().cloned().filter(|&x| x > 0.0).collect();
    let mut neg: Vec<f64> = pts.iter().cloned().filter(|&x| x < 0.0).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pos.dedup();
    neg.sort_by(|a, b| b.partial_cmp(a).unwrap());
    neg.dedup();

    let n = grid.len();
    let mut j_at: Vec<(f64, Vec<Complex64>)> = vec![(0.0, vec![Complex64::default(); n])];
    for side in [pos, neg] {
        let mut a = 0.0;
        let mut ia = vec![Complex64::default(); n];
        let mut ja = vec![Complex64::default(); n];
        for b in side {
            let panels = ((b - a).abs() / h_max).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            let quad: Vec<(f64, f64)> = (0..panels)
                .flat_map(|k| gauss_legendre_4(a + k as f64 * h, a + (k + 1) as f64 * h))
                .collect();
            let mut ib = ia.clone();
            let mut jb: Vec<Complex64> = (0..n).map(|i| ja[i] + ia[i] * (b - a)).collect();
            // Partial sums are combined in a fixed order, one bounded block at a time.
            const CHUNK: usize = 16;
            const BLOCK: usize = CHUNK * 64;
            for block in quad.chunks(BLOCK) {
                let parts: Vec<(Vec<Complex64>, Vec<Complex64>)> = block
                    .par_chunks(CHUNK)
                    .map(|chunk| {
                        let mut si = vec![Complex64::default(); n];
                        let mut sj = vec![Complex64::default(); n];
                        for &(tau, w) in chunk {
                            let hv = op.pointwise_raw(&raw0, tau);
                            for i in 0..n {
                                si[i] += hv[i] * w;
                                sj[i] += hv[i] * (w * (b - tau));
                            }
                        }
                        (si, sj)
                    })
                    .collect();
                for (si, sj) in parts {
                    for i in 0..n {
                        ib[i] += si[i];
                        jb[i] += sj[i];
                    }
                }
            }
            j_at.push((b, jb.clone()));
            a = b;
            ia = ib;
            ja = jb;
        }
    }
    let lookup = |x: f64| -> &Vec<Complex64> {
        &j_at
            .iter()
            .find(|(p, _)| *p == x)
            .expect("breakpoint was integrated")
            .1
    };

    let ksq = grid.ksq();
    let j_lambda = lookup(lambda);
    Ok(times
        .iter()
        .map(|&t| {
            let (j1, j2) = (lookup(g * t + lambda), lookup(g * t));
            let scale = Complex64::new(0.0, density / g);
            let mut raw: Vec<Complex64> = (0..n).map(|i| (j1[i] - j_lambda[i] - j2[i]) * scale).collect();
            spectral::propagate_raw(&mut raw, &ksq, g * t);
            Field::from_raw_spectrum(&grid, raw)
        })
        .collect())
}
