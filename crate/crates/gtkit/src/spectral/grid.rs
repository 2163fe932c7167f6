use crate::error::{config, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Periodic box `[-L/2, L/2)^d` sampled at `n` points per axis.
///
/// Wavenumbers are stored in FFT order: index `k` on an axis of size `n`
/// carries the signed integer `k` for `k < n/2` and `k - n` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: Vec<usize>,
    l: Vec<f64>,
}

/// Builds a grid after checking sizes and periods.
pub fn make_grid(d: usize, n: &[usize], l: &[f64]) -> Result<Grid> {
    if !(1..=3).contains(&d) {
        return config(format!("dimension must be 1, 2 or 3, got {d}"));
    }
    if n.len() != d || l.len() != d {
        return config(format!(
            "expected {d} sizes and periods, got {} and {}",
            n.len(),
            l.len()
        ));
    }
    for &ni in n {
        if ni < 8 || !ni.is_power_of_two() {
            return config(format!("grid size {ni} is not a power of two >= 8"));
        }
    }
    for &li in l {
        if !(li.is_finite() && li > 0.0) {
            return config(format!("period {li} must be positive and finite"));
        }
    }
    Ok(Grid {
        n: n.to_vec(),
        l: l.to_vec(),
    })
}

impl Grid {
    /// One-dimensional shorthand for `make_grid(1, &[n], &[l])`.
    pub fn line(n: usize, l: f64) -> Result<Grid> {
        make_grid(1, &[n], &[l])
    }

    pub fn d(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.l[axis] / self.n[axis] as f64
    }

    pub fn dxi(&self, axis: usize) -> f64 {
        2.0 * PI / self.l[axis]
    }

    /// Volume element `prod dx_i`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.d()).map(|a| self.dx(a)).product()
    }

    /// Frequency volume element `prod dxi_i`.
    pub fn dual_cell_volume(&self) -> f64 {
        (0..self.d()).map(|a| self.dxi(a)).product()
    }

    /// Coordinates `x_j = -L/2 + j dx`.
    pub fn x(&self, axis: usize) -> Vec<f64> {
        let dx = self.dx(axis);
        let half = self.l[axis] / 2.0;
        (0..self.n[axis]).map(|j| -half + j as f64 * dx).collect()
    }

    /// Signed integer wavenumber index for storage slot `k` on `axis`.
    pub fn signed_index(&self, axis: usize, k: usize) -> i64 {
        let n = self.n[axis];
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Wavenumbers `2 pi k / L` in FFT order.
    pub fn xi(&self, axis: usize) -> Vec<f64> {
        let dxi = self.dxi(axis);
        (0..self.n[axis])
            .map(|k| self.signed_index(axis, k) as f64 * dxi)
            .collect()
    }

    /// Largest |xi| per axis, attained only by the Nyquist mode.
    pub fn xi_max(&self, axis: usize) -> f64 {
        PI * self.n[axis] as f64 / self.l[axis]
    }

    /// Square of the largest wavevector modulus on the lattice.
    pub fn xi_max_sq(&self) -> f64 {
        (0..self.d()).map(|a| self.xi_max(a).powi(2)).sum()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.d()];
        for a in (0..self.d().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.n[a + 1];
        }
        s
    }

    /// Multi-index of a flat row-major position.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.d()).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    /// `|xi|^2` at every storage position (FFT order).
    pub fn ksq(&self) -> Vec<f64> {
        let xis: Vec<Vec<f64>> = (0..self.d()).map(|a| self.xi(a)).collect();
        (0..self.len())
            .map(|f| {
                let idx = self.unravel(f);
                (0..self.d()).map(|a| xis[a][idx[a]].powi(2)).sum()
            })
            .collect()
    }

    /// Per-axis wavevector components at every storage position.
    pub fn xi_components(&self) -> Vec<Vec<f64>> {
        let xis: Vec<Vec<f64>> = (0..self.d()).map(|a| self.xi(a)).collect();
        (0..self.d())
            .map(|a| {
                (0..self.len())
                    .map(|f| xis[a][self.unravel(f)[a]])
                    .collect()
            })
            .collect()
    }

    /// Per-axis coordinates at every storage position.
    pub fn x_components(&self) -> Vec<Vec<f64>> {
        let xs: Vec<Vec<f64>> = (0..self.d()).map(|a| self.x(a)).collect();
        (0..self.d())
            .map(|a| (0..self.len()).map(|f| xs[a][self.unravel(f)[a]]).collect())
            .collect()
    }

    /// Grid with every period and size multiplied by `lambda`; the spacing is unchanged.
    pub fn enlarged(&self, lambda: usize) -> Result<Grid> {
        if lambda == 0 {
            return config("enlargement factor must be positive");
        }
        let n: Vec<usize> = self.n.iter().map(|&n| n * lambda).collect();
        let l: Vec<f64> = self.l.iter().map(|&l| l * lambda as f64).collect();
        make_grid(self.d(), &n, &l)
    }
}
