use crate::error::{config, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Chebyshev-Lobatto nodes on `[0, T]` (or `[T, 0]`) with the matrix of `f -> int_0^t f`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeNodes {
    horizon: f64,
    times: Vec<f64>,
    // Angles phi_q with x_q = cos(phi_q) in [-1, 1]; x_0 = -1 maps to t = 0.
    angles: Vec<f64>,
    matrix: Vec<f64>,
}

pub const MIN_NODES: usize = 8;

// int_{-1}^{x} T_k
fn integral_tk(k: usize, x: f64) -> f64 {
    let t = |m: usize, x: f64| (m as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let at = |x: f64| match k {
        0 => x,
        1 => 0.5 * x * x,
        _ => t(k + 1, x) / (2.0 * (k + 1) as f64) - t(k - 1, x) / (2.0 * (k - 1) as f64),
    };
    at(x) - at(-1.0)
}

impl TimeNodes {
    pub fn new(horizon: f64, q: usize) -> Result<Self> {
        if q < MIN_NODES {
            return config(format!("need at least {MIN_NODES} time nodes, got {q}"));
        }
        if !(horizon.is_finite() && horizon != 0.0) {
            return config("time horizon must be finite and nonzero");
        }
        let m = (q - 1) as f64;
        let angles: Vec<f64> = (0..q).map(|i| PI * (1.0 - i as f64 / m)).collect();
        let xs: Vec<f64> = (0..q).map(|i| -(PI * i as f64 / m).cos()).collect();
        let times = xs.iter().map(|x| 0.5 * horizon * (1.0 + x)).collect();

        // coef[k][j]: weight of f(x_j) in the k-th Chebyshev coefficient.
        let mut coef = vec![vec![0.0; q]; q];
        for (k, row) in coef.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                let end = if j == 0 || j == q - 1 { 0.5 } else { 1.0 };
                *c = 2.0 / m * end * (k as f64 * angles[j]).cos();
            }
            if k == 0 || k == q - 1 {
                for c in row.iter_mut() {
                    *c *= 0.5;
                }
            }
        }
        let mut matrix = vec![0.0; q * q];
        for (i, &x) in xs.iter().enumerate() {
            for (k, row) in coef.iter().enumerate() {
                let ik = integral_tk(k, x) * 0.5 * horizon;
                for j in 0..q {
                    matrix[i * q + j] += ik * row[j];
                }
            }
        }
        Ok(TimeNodes {
            horizon,
            times,
            angles,
            matrix,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Row-major `Q x Q` integration matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.horizon > 0.0 {
            (0.0, self.horizon)
        } else {
            (self.horizon, 0.0)
        };
        t >= lo && t <= hi
    }

    /// `int_0^{t_i} f` at every node from samples of `f`.
    pub fn integrate_scalar(&self, f: &[f64]) -> Vec<f64> {
        let q = self.len();
        (0..q)
            .map(|i| (0..q).map(|j| self.matrix[i * q + j] * f[j]).sum())
            .collect()
    }

    /// [`Self::integrate_scalar`] applied to every component of vector samples.
    pub fn integrate(&self, f: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let q = self.len();
        let n = f.first().map_or(0, |v| v.len());
        (0..q)
            .map(|i| {
                let mut out = vec![Complex64::default(); n];
                for (j, fj) in f.iter().enumerate() {
                    let w = self.matrix[i * q + j];
                    if w != 0.0 {
                        for (o, z) in out.iter_mut().zip(fj) {
                            *o += z * w;
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Barycentric weights `l_q(t)` of the Lobatto interpolant.
    pub fn interpolation_weights(&self, t: f64) -> Vec<f64> {
        let q = self.len();
        let x = 2.0 * t / self.horizon - 1.0;
        let xs: Vec<f64> = self.angles.iter().map(|a| a.cos()).collect();
        if let Some(k) = xs.iter().position(|&xq| (x - xq).abs() < 1e-15) {
            let mut w = vec![0.0; q];
            w[k] = 1.0;
            return w;
        }
        let bw: Vec<f64> = (0..q)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == q - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let terms: Vec<f64> = (0..q).map(|j| bw[j] / (x - xs[j])).collect();
        let den: f64 = terms.iter().sum();
        terms.iter().map(|v| v / den).collect()
    }
}
