//! Grids, transforms, the free propagator and the norms and moments built on them.
//!
//! The continuous transform is the unitary one, `f^(xi) = (2 pi)^{-d/2} int e^{-i x.xi} f dx`.
//! On the lattice it is approximated by the rectangle rule, which makes Plancherel exact:
//! `sum |f^|^2 dxi^d = sum |f|^2 dx^d`. The propagator `e^{i a Delta}` is the multiplier
//! `e^{-i a |xi|^2}`.

pub mod fft;
mod field;
mod grid;

pub use field::Field;
pub use grid::{make_grid, Grid};

use crate::error::{GtError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Regularity index of an `H^s` or homogeneous `\dot H^s` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub fn inhomogeneous(s: f64) -> Self {
        SobolevIndex { s, homogeneous: false }
    }

    pub fn homogeneous(s: f64) -> Self {
        SobolevIndex { s, homogeneous: true }
    }
}

/// A moment together with a flag raised when too much mass sits near the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: f64,
    pub degraded: bool,
}

/// Boundary-mass fraction above which moments are flagged.
pub const BOUNDARY_TOLERANCE: f64 = 1e-4;

/// Relative zero-mode size treated as an exact zero in homogeneous norms.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-12;

/// Multiplies a raw spectrum by `e^{-i a |xi|^2}`, i.e. applies `e^{i a Delta}`.
pub fn propagate_raw(raw: &mut [Complex64], ksq: &[f64], a: f64) {
    if a == 0.0 {
        return;
    }
    for (z, &k2) in raw.iter_mut().zip(ksq) {
        *z *= Complex64::from_polar(1.0, -a * k2);
    }
}

/// `e^{i c tau Delta} u`.
pub fn free_propagate(u: &Field, tau: f64, c: f64) -> Field {
    let mut raw = u.raw_spectrum();
    propagate_raw(&mut raw, &u.grid().ksq(), c * tau);
    Field::from_raw_spectrum(u.grid(), raw)
}

/// Unitary-normalized spectrum `f^(xi_k)` in FFT order.
pub fn spectrum(u: &Field) -> Vec<Complex64> {
    let grid = u.grid();
    let mut raw = u.raw_spectrum();
    let scale = grid.cell_volume() / (2.0 * PI).powf(grid.d() as f64 / 2.0);
    for (f, z) in raw.iter_mut().enumerate() {
        let idx = grid.unravel(f);
        let parity: i64 = (0..grid.d()).map(|a| grid.signed_index(a, idx[a])).sum();
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *z *= scale * sign;
    }
    raw
}

/// Inverse of [`spectrum`].
pub fn from_spectrum(grid: &Grid, spec: &[Complex64]) -> Result<Field> {
    if spec.len() != grid.len() {
        return Err(GtError::Mismatch("spectrum length does not match grid".into()));
    }
    let scale = (2.0 * PI).powf(grid.d() as f64 / 2.0) / grid.cell_volume();
    let raw: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(f, z)| {
            let idx = grid.unravel(f);
            let parity: i64 = (0..grid.d()).map(|a| grid.signed_index(a, idx[a])).sum();
            let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            z * scale * sign
        })
        .collect();
    Ok(Field::from_raw_spectrum(grid, raw))
}

/// `(sum w(xi)^{2s} |u^(xi)|^2 dxi^d)^{1/2}` with `w = |xi|` or `<xi>`.
pub fn sobolev_norm(u: &Field, idx: SobolevIndex) -> Result<f64> {
    let raw = u.raw_spectrum();
    sobolev_norm_raw(u.grid(), &raw, idx)
}

/// [`sobolev_norm`] on a raw spectrum.
pub fn sobolev_norm_raw(grid: &Grid, raw: &[Complex64], idx: SobolevIndex) -> Result<f64> {
    let ksq = grid.ksq();
    let total: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    let scale = grid.cell_volume() / grid.len() as f64;
    let mut acc = 0.0;
    for (z, &k2) in raw.iter().zip(&ksq) {
        let m = z.norm_sqr();
        if m == 0.0 {
            continue;
        }
        let w2 = if idx.homogeneous { k2 } else { 1.0 + k2 };
        if w2 == 0.0 {
            if idx.s < 0.0 {
                if m > ZERO_MODE_TOLERANCE * total {
                    return Err(GtError::Domain(format!(
                        "homogeneous norm with s = {} needs a vanishing zero mode",
                        idx.s
                    )));
                }
                continue;
            }
            if idx.s > 0.0 {
                continue;
            }
            acc += m;
            continue;
        }
        acc += w2.powf(idx.s) * m;
    }
    Ok((acc * scale).sqrt())
}

/// `(sum |u|^q dx^d)^{1/q}`.
pub fn lebesgue_norm(u: &Field, q: f64) -> f64 {
    let sum: f64 = u.values().iter().map(|z| z.norm().powf(q)).sum();
    (sum * u.grid().cell_volume()).powf(1.0 / q)
}

/// `||u||_{L^2}^2`.
pub fn mass(u: &Field) -> f64 {
    u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * u.grid().cell_volume()
}

/// Spectral partial derivatives `d_j u`, one field per axis.
pub fn gradient(u: &Field) -> Vec<Field> {
    let grid = u.grid();
    let raw = u.raw_spectrum();
    grid.xi_components()
        .into_iter()
        .map(|xi| {
            let r: Vec<Complex64> = raw
                .iter()
                .zip(&xi)
                .map(|(z, &k)| z * Complex64::new(0.0, k))
                .collect();
            Field::from_raw_spectrum(grid, r)
        })
        .collect()
}

/// Fraction of the mass in the outer 10% shell of the box.
pub fn boundary_mass_fraction(u: &Field) -> f64 {
    let grid = u.grid();
    let xs = grid.x_components();
    let total: f64 = u.values().iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut outer = 0.0;
    for (i, z) in u.values().iter().enumerate() {
        let edge = (0..grid.d()).any(|a| xs[a][i].abs() >= 0.9 * grid.l()[a] / 2.0);
        if edge {
            outer += z.norm_sqr();
        }
    }
    outer / total
}

/// Fraction of the mass carried by modes in the top third of any axis' band.
pub fn spectral_tail_fraction(u: &Field) -> f64 {
    spectral_tail_fraction_raw(u.grid(), &u.raw_spectrum())
}

/// [`spectral_tail_fraction`] on a raw spectrum.
pub fn spectral_tail_fraction_raw(grid: &Grid, raw: &[Complex64]) -> f64 {
    let total: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0;
    for (f, z) in raw.iter().enumerate() {
        let idx = grid.unravel(f);
        let high = (0..grid.d()).any(|a| {
            let k = grid.signed_index(a, idx[a]).unsigned_abs() as f64;
            3.0 * k > grid.n()[a] as f64
        });
        if high {
            tail += z.norm_sqr();
        }
    }
    tail / total
}

/// Variance `v = int |x|^2 |u|^2 dx`.
pub fn moment_variance(u: &Field) -> Moment {
    let grid = u.grid();
    let xs = grid.x_components();
    let sum: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let r2: f64 = (0..grid.d()).map(|a| xs[a][i] * xs[a][i]).sum();
            r2 * z.norm_sqr()
        })
        .sum();
    Moment {
        value: sum * grid.cell_volume(),
        degraded: boundary_mass_fraction(u) >= BOUNDARY_TOLERANCE,
    }
}

/// `4 Im int conj(u) (x . grad u) dx`.
pub fn radial_momentum(u: &Field) -> Moment {
    let grid = u.grid();
    let xs = grid.x_components();
    let grad = gradient(u);
    let mut acc = 0.0;
    for (i, z) in u.values().iter().enumerate() {
        let mut xg = Complex64::default();
        for a in 0..grid.d() {
            xg += grad[a].values()[i] * xs[a][i];
        }
        acc += (z.conj() * xg).im;
    }
    Moment {
        value: 4.0 * acc * grid.cell_volume(),
        degraded: boundary_mass_fraction(u) >= BOUNDARY_TOLERANCE,
    }
}
