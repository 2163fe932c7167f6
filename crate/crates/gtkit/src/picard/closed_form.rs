//! First iterate of cubic one-dimensional data, exact in both time and sigma.
//!
//! For `d = 1`, `p = 2` the first iterate has the Fourier representation
//!
//! `Xi_1^(t, xi) = i e^{-i gamma t xi^2} (2 pi)^{-1} sum K_t(Phi) phi^(xi_1) conj(phi^(xi_2)) phi^(xi_3) dxi^2`
//!
//! over lattice triples with `xi_1 - xi_2 + xi_3 = xi`, where
//! `Phi = xi^2 - xi_1^2 + xi_2^2 - xi_3^2 = 2 (xi - xi_1)(xi_1 - xi_2)` and
//! `K_t = gamma^{-1} E(gamma t, Phi) E(1, Phi)`, `E(tau, Phi) = int_0^tau e^{i theta Phi} d theta`.
//! Since `Phi = 2 dxi^2 m n` for integers `m, n`, the kernel is tabulated by `m n`.

use crate::error::{config, GtError, Result};
use crate::initial_data::{freq_box_data, InflationParams, SnappedBox};
use crate::nonlinearity::{GTConfig, Variant};
use crate::spectral::{self, Field, Grid};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const TAYLOR_SWITCH: f64 = 1e-4;

/// `int_0^tau e^{i theta phi} d theta`, with a Taylor expansion near `tau phi = 0`.
pub fn phase_integral(tau: f64, phi: f64) -> Complex64 {
    let x = tau * phi;
    if x.abs() < TAYLOR_SWITCH {
        return Complex64::new(tau * (1.0 - x * x / 6.0), tau * x / 2.0);
    }
    (Complex64::from_polar(1.0, x) - 1.0) / Complex64::new(0.0, phi)
}

/// `D_tau(Phi) = (1 - e^{-i tau Phi}) / (i Phi)`, equal to `tau` at `Phi = 0`.
pub fn d_kernel(tau: f64, phi: f64) -> Complex64 {
    phase_integral(tau, -phi)
}

/// Fourier coefficients `f^(k dxi)` for `k` in `offset .. offset + values.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    pub dxi: f64,
    pub offset: i64,
    pub values: Vec<Complex64>,
}

impl SparseSpectrum {
    pub fn zeros(dxi: f64, lo: i64, hi: i64) -> Self {
        SparseSpectrum {
            dxi,
            offset: lo,
            values: vec![Complex64::default(); (hi - lo + 1).max(0) as usize],
        }
    }

    /// Largest index covered.
    pub fn hi(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let i = k - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            Complex64::default()
        } else {
            self.values[i as usize]
        }
    }

    /// Indices with nonzero coefficients.
    pub fn support(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != Complex64::default())
            .map(|(i, _)| self.offset + i as i64)
            .collect()
    }

    /// `(sum <xi>^{2s} |f^|^2 dxi)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let acc: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let xi = (self.offset + i as i64) as f64 * self.dxi;
                (1.0 + xi * xi).powf(s) * z.norm_sqr()
            })
            .sum();
        (acc * self.dxi).sqrt()
    }

    /// `min |f^(xi)|` over lattice points with `lo <= xi <= hi`.
    pub fn min_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let k0 = (lo / self.dxi).ceil() as i64;
        let k1 = (hi / self.dxi).floor() as i64;
        (k0..=k1).map(|k| self.get(k).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Spectrum of a one-dimensional field.
    pub fn from_field(u: &Field) -> Result<Self> {
        let grid = u.grid();
        if grid.d() != 1 {
            return config("sparse spectra are one-dimensional");
        }
        let n = grid.n()[0] as i64;
        let spec = spectral::spectrum(u);
        let mut out = SparseSpectrum::zeros(grid.dxi(0), -n / 2, n / 2 - 1);
        for (f, z) in spec.into_iter().enumerate() {
            let k = grid.signed_index(0, f);
            out.values[(k + n / 2) as usize] = z;
        }
        Ok(out)
    }

    /// The field with this spectrum; every nonzero mode must fit in the grid's band.
    pub fn to_field(&self, grid: &Grid) -> Result<Field> {
        if grid.d() != 1 || (grid.dxi(0) - self.dxi).abs() > 1e-12 * self.dxi {
            return Err(GtError::Mismatch("grid does not match the spectrum lattice".into()));
        }
        let n = grid.n()[0] as i64;
        let mut spec = vec![Complex64::default(); n as usize];
        for k in self.support() {
            if k < -n / 2 || k >= n / 2 {
                return Err(GtError::Domain(format!("mode {k} lies outside the grid band")));
            }
            spec[k.rem_euclid(n) as usize] = self.get(k);
        }
        spectral::from_spectrum(grid, &spec)
    }

    /// Box data `R (1_{[N, N+A)} + 1_{[2N, 2N+A)})`.
    pub fn from_box(b: &SnappedBox) -> Self {
        let mut out = SparseSpectrum::zeros(b.dxi, b.n_index, 2 * b.n_index + b.a_modes - 1);
        for k in b.modes() {
            out.values[(k - b.n_index) as usize] = Complex64::new(b.r, 0.0);
        }
        out
    }
}

/// Kernel values indexed by `P = m n` in `[-p_max, p_max]`.
pub(crate) struct ProductTable {
    p_max: i64,
    values: Vec<Complex64>,
}

impl ProductTable {
    pub(crate) fn new(p_max: i64, f: impl Fn(f64) -> Complex64 + Sync) -> Self {
        let values = (-p_max..=p_max).into_par_iter().map(|p| f(p as f64)).collect();
        ProductTable { p_max, values }
    }

    #[inline]
    pub(crate) fn get(&self, p: i64) -> Complex64 {
        self.values[(p + self.p_max) as usize]
    }
}

/// Accumulates `sum K(m n) a(k1) conj(b(k2)) c(k3)` into `k = k1 - k2 + k3`, with
/// `m = k3 - k2`, `n = k1 - k2`. Deterministic for any thread count.
pub(crate) fn cubic_scatter(
    a: &SparseSpectrum,
    b: &SparseSpectrum,
    c: &SparseSpectrum,
    table: &ProductTable,
    out: &mut SparseSpectrum,
) {
    let sa = a.support();
    let sb = b.support();
    let sc = c.support();
    const CHUNK: usize = 4;
    let chunks: Vec<&[i64]> = sa.chunks(CHUNK).collect();
    let partial: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|ks| {
            let mut acc = vec![Complex64::default(); out.values.len()];
            for &k1 in ks.iter() {
                let fa = a.get(k1);
                for &k2 in &sb {
                    let ab = fa * b.get(k2).conj();
                    let n = k1 - k2;
                    for &k3 in &sc {
                        let idx = (k1 - k2 + k3 - out.offset) as usize;
                        acc[idx] += table.get((k3 - k2) * n) * ab * c.get(k3);
                    }
                }
            }
            acc
        })
        .collect();
    for part in partial {
        for (o, z) in out.values.iter_mut().zip(part) {
            *o += z;
        }
    }
}

/// Output index range of the cubic interaction of three spectra, from their extents.
pub(crate) fn cubic_range(a: &SparseSpectrum, b: &SparseSpectrum, c: &SparseSpectrum) -> (i64, i64) {
    let lo = |s: &SparseSpectrum| s.offset;
    let hi = |s: &SparseSpectrum| s.hi();
    (lo(a) - hi(b) + lo(c), hi(a) - lo(b) + hi(c))
}

/// Largest `|m n|` reachable in [`cubic_scatter`].
pub(crate) fn cubic_p_max(a: &SparseSpectrum, b: &SparseSpectrum, c: &SparseSpectrum) -> i64 {
    let lo = |s: &SparseSpectrum| s.offset;
    let hi = |s: &SparseSpectrum| s.hi();
    let m = (hi(c) - lo(b)).abs().max((lo(c) - hi(b)).abs());
    let n = (hi(a) - lo(b)).abs().max((lo(a) - hi(b)).abs());
    m * n
}

/// `Xi_1^(t)` of cubic one-dimensional data given by its spectrum.
pub fn xi1_closed_form_spectrum(phi: &SparseSpectrum, t: f64, gamma: f64) -> SparseSpectrum {
    let dxi = phi.dxi;
    let (lo, hi) = cubic_range(phi, phi, phi);
    let mut out = SparseSpectrum::zeros(dxi, lo, hi);
    if t == 0.0 || phi.support().is_empty() {
        return out;
    }
    let p_max = cubic_p_max(phi, phi, phi);
    let c = 2.0 * dxi * dxi;
    let table = ProductTable::new(p_max, |p| {
        let ph = c * p;
        phase_integral(gamma * t, ph) * phase_integral(1.0, ph) / gamma
    });
    cubic_scatter(phi, phi, phi, &table, &mut out);
    let pre = dxi * dxi / (2.0 * PI);
    for (i, z) in out.values.iter_mut().enumerate() {
        let xi = (lo + i as i64) as f64 * dxi;
        *z *= Complex64::i() * Complex64::from_polar(pre, -gamma * t * xi * xi);
    }
    out
}

/// `Xi_1^(t)` of the frequency-box data on the lattice of `grid`, with the snapped box.
pub fn xi1_closed_form(
    params: &InflationParams,
    t: f64,
    grid: &Grid,
    cfg: &GTConfig,
) -> Result<(SparseSpectrum, SnappedBox)> {
    if cfg.d != 1 || cfg.p != 2 || cfg.variant != Variant::AveragedUnit {
        return config("the closed form covers the cubic one-dimensional equation");
    }
    let (_, b) = freq_box_data(grid, params)?;
    let phi = SparseSpectrum::from_box(&b);
    Ok((xi1_closed_form_spectrum(&phi, t, cfg.gamma), b))
}
