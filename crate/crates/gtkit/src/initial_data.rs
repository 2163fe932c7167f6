//! Initial-data families and the two rescalings.

use crate::error::{config, GtError, Result};
use crate::spectral::{self, fft, Field, Grid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `(s_m, s_i) = (d/2 - 2/p, d/2 - 4/p)`.
pub fn critical_regularities(d: usize, p: u32) -> (f64, f64) {
    let d = d as f64;
    let p = p as f64;
    (d / 2.0 - 2.0 / p, d / 2.0 - 4.0 / p)
}

/// Frequency-box parameters: base frequency `N`, width `A`, height `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationParams {
    pub n: f64,
    pub a: f64,
    pub r: f64,
    pub delta: f64,
    pub s: f64,
}

impl InflationParams {
    /// `R = N^{1+3 delta}`, `A = N^{1-delta}`.
    pub fn from_n_delta(n: f64, delta: f64, s: f64) -> Self {
        InflationParams {
            n,
            a: n.powf(1.0 - delta),
            r: n.powf(1.0 + 3.0 * delta),
            delta,
            s,
        }
    }

    /// `T = N^{-3-6 delta}`.
    pub fn t_inflation(&self) -> f64 {
        self.n.powf(-3.0 - 6.0 * self.delta)
    }

    /// Exponent of `||phi||_{H^s}` in `N` under the parameter relations.
    pub fn data_norm_exponent(&self) -> f64 {
        self.s + 1.5 + 2.5 * self.delta
    }
}

/// Lattice values actually used by [`freq_box_data`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnappedBox {
    /// First mode index of the lower box.
    pub n_index: i64,
    /// Number of modes per box.
    pub a_modes: i64,
    pub n_eff: f64,
    pub a_eff: f64,
    pub r: f64,
    pub dxi: f64,
}

impl SnappedBox {
    /// Signed mode indices of both boxes, ascending.
    pub fn modes(&self) -> Vec<i64> {
        (self.n_index..self.n_index + self.a_modes)
            .chain(2 * self.n_index..2 * self.n_index + self.a_modes)
            .collect()
    }

    /// Whether `A_eff >= 8 dxi` and `N_eff >= 4 A_eff`.
    pub fn well_separated(&self) -> bool {
        self.a_modes >= 8 && self.n_index >= 4 * self.a_modes
    }
}

/// Snaps `N` and `A` to the lattice of spacing `dxi` and checks the boxes.
pub fn snap_box(params: &InflationParams, dxi: f64, n_points: usize) -> Result<SnappedBox> {
    let n_index = (params.n / dxi).round() as i64;
    let a_modes = (params.a / dxi).round() as i64;
    if a_modes < 1 {
        return config(format!(
            "box width {} is below the lattice spacing {dxi}",
            params.a
        ));
    }
    if a_modes > n_index {
        return config("frequency boxes overlap");
    }
    if 2 * n_index + a_modes > (n_points / 2) as i64 {
        return config(format!(
            "upper box reaches mode {}, the grid stops at {}",
            2 * n_index + a_modes - 1,
            n_points / 2 - 1
        ));
    }
    Ok(SnappedBox {
        n_index,
        a_modes,
        n_eff: n_index as f64 * dxi,
        a_eff: a_modes as f64 * dxi,
        r: params.r,
        dxi,
    })
}

/// `phi^ = R (1_{[N, N+A)} + 1_{[2N, 2N+A)})` on the lattice, one-dimensional.
pub fn freq_box_data(grid: &Grid, params: &InflationParams) -> Result<(Field, SnappedBox)> {
    if grid.d() != 1 {
        return config("frequency-box data is one-dimensional");
    }
    let n = grid.n()[0];
    let b = snap_box(params, grid.dxi(0), n)?;
    let mut spec = vec![Complex64::default(); n];
    for k in b.modes() {
        spec[k as usize] = Complex64::new(params.r, 0.0);
    }
    Ok((spectral::from_spectrum(grid, &spec)?, b))
}

/// Smooth radial profile: 1 on `[1/2, 2]`, 0 outside `[1/4, 4]`.
///
/// The transition is the step `f(1 - t) / (f(1 - t) + f(t))` with `f(t) = e^{-1/t}`, which
/// is flat to all orders at both ends of the band.
pub fn annulus_profile(r: f64) -> f64 {
    fn flat(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    fn blend(t: f64) -> f64 {
        if t >= 1.0 {
            0.0
        } else if t <= 0.0 {
            1.0
        } else {
            flat(1.0 - t) / (flat(1.0 - t) + flat(t))
        }
    }
    if (0.5..=2.0).contains(&r) {
        1.0
    } else if (0.25..0.5).contains(&r) {
        blend((0.5 - r) / 0.25)
    } else if r > 2.0 && r < 4.0 {
        blend((r - 2.0) / 2.0)
    } else {
        0.0
    }
}

/// Annulus data at frequency `N` with the free flow applied for time `theta`:
/// `psi^ = phi^(xi/N) e^{-i theta |xi|^2}`.
pub fn annulus_bump_shifted(grid: &Grid, n: f64, theta: f64) -> Result<Field> {
    if !(n > 0.0) {
        return config("annulus frequency must be positive");
    }
    for a in 0..grid.d() {
        if 4.0 * n >= grid.xi_max(a) {
            return config(format!(
                "annulus reaches |xi| = {}, grid bandwidth is {}",
                4.0 * n,
                grid.xi_max(a)
            ));
        }
    }
    let ksq = grid.ksq();
    let spec: Vec<Complex64> = ksq
        .iter()
        .map(|&k2| Complex64::from_polar(annulus_profile(k2.sqrt() / n), -theta * k2))
        .collect();
    spectral::from_spectrum(grid, &spec)
}

/// `psi_N` with the backward shift `e^{-i (1 ^ T) Delta}` that puts its focus at time `1 ^ T`.
pub fn annulus_bump(grid: &Grid, n: f64, t: f64) -> Result<Field> {
    annulus_bump_shifted(grid, n, -t.min(1.0))
}

/// Gaussian amplitude and width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub a: f64,
    pub sigma: f64,
}

/// `A e^{-|x|^2 / 4 sigma^2}`, which must fall below `1e-12` at the box edge.
pub fn gaussian_data(grid: &Grid, params: &GaussianParams) -> Result<Field> {
    let GaussianParams { a, sigma } = *params;
    if !(a > 0.0 && sigma > 0.0) {
        return config("Gaussian amplitude and width must be positive");
    }
    for ax in 0..grid.d() {
        if sigma < 4.0 * grid.dx(ax) {
            return config(format!(
                "Gaussian width {sigma} is under-resolved (dx = {})",
                grid.dx(ax)
            ));
        }
        let l = grid.l()[ax];
        if (-l * l / (16.0 * sigma * sigma)).exp() >= 1e-12 {
            return config(format!("period {l} is too short for width {sigma}"));
        }
    }
    Ok(Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new(a * (-r2 / (4.0 * sigma * sigma)).exp(), 0.0)
    }))
}

/// `lambda^{-alpha} u(x / lambda)` sampled on the grid enlarged by `lambda`.
///
/// The enlarged lattice keeps every mode index, so for a trigonometric polynomial the
/// map is exact.
pub fn rescale(u: &Field, lambda: usize, alpha: f64) -> Result<Field> {
    if lambda == 0 {
        return Err(GtError::Config("rescaling factor must be positive".into()));
    }
    if lambda == 1 {
        return Ok(u.clone());
    }
    if !lambda.is_power_of_two() {
        return config(format!(
            "rescaling factor {lambda} must be a power of two to keep the grid admissible"
        ));
    }
    let grid = u.grid();
    let big = grid.enlarged(lambda)?;
    let c = (lambda as f64).powf(-alpha) * (lambda as f64).powi(grid.d() as i32);
    let mut raw = fft::pad_spectrum(&u.raw_spectrum(), grid.n(), lambda);
    for z in raw.iter_mut() {
        *z *= c;
    }
    Ok(Field::from_raw_spectrum(&big, raw))
}

/// `lambda^{-2/p} u(x / lambda)`.
pub fn rescale_monomial(u: &Field, lambda: usize, p: u32) -> Result<Field> {
    rescale(u, lambda, 2.0 / p as f64)
}

/// `lambda^{-4/p} u(x / lambda)`.
pub fn rescale_integrated(u: &Field, lambda: usize, p: u32) -> Result<Field> {
    rescale(u, lambda, 4.0 / p as f64)
}
