use super::fft;
use super::grid::Grid;
use crate::error::{GtError, Result};
use num_complex::Complex64;

/// Complex samples of a function on a [`Grid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    /// Wraps samples, rejecting wrong lengths and non-finite entries.
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(GtError::Mismatch(format!(
                "field has {} samples, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(GtError::Domain("field contains NaN or infinite samples".into()));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Field {
        Field {
            values: vec![Complex64::default(); grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let xs = grid.x_components();
        let d = grid.d();
        let mut x = vec![0.0; d];
        let values = (0..grid.len())
            .map(|i| {
                for a in 0..d {
                    x[a] = xs[a][i];
                }
                f(&x)
            })
            .collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    /// Builds a field from a raw (unnormalized DFT) spectrum.
    pub fn from_raw_spectrum(grid: &Grid, mut raw: Vec<Complex64>) -> Field {
        fft::inverse(&mut raw, grid.n());
        let scale = 1.0 / grid.len() as f64;
        for z in raw.iter_mut() {
            *z *= scale;
        }
        Field {
            grid: grid.clone(),
            values: raw,
        }
    }

    /// Unnormalized DFT of the samples, FFT order.
    pub fn raw_spectrum(&self) -> Vec<Complex64> {
        let mut raw = self.values.clone();
        fft::forward(&mut raw, self.grid.n());
        raw
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scale(&self, a: Complex64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * a).collect(),
        }
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// `(sum |u|^2 dx^d)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// L2 norm of `self - other`.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn check_same(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(GtError::Mismatch("fields live on different grids".into()));
        }
        Ok(())
    }
}
