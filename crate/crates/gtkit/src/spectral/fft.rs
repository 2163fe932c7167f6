//! Unnormalized multidimensional FFTs over row-major buffers.
//!
//! Plans come from a thread-local planner, so each worker keeps its own cache.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total, "buffer length does not match dims");
    let d = dims.len();
    let mut line = Vec::new();
    for axis in 0..d {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let fft = plan(n, inverse);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let stride: usize = dims[axis + 1..].iter().product();
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let outer: usize = dims[..axis].iter().product();
        line.resize(n, Complex64::default());
        for o in 0..outer {
            let base = o * n * stride;
            for s in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride + s];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride + s] = *v;
                }
            }
        }
    }
}

/// In-place forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}` on every axis.
pub fn forward(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, false);
}

/// In-place inverse DFT without the `1/n` factor.
pub fn inverse(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, true);
}

/// Copies a raw spectrum of shape `dims` into a zero spectrum of shape
/// `factor * dims`, keeping every signed wavenumber in place.
pub fn pad_spectrum(src: &[Complex64], dims: &[usize], factor: usize) -> Vec<Complex64> {
    let big: Vec<usize> = dims.iter().map(|&n| n * factor).collect();
    let mut out = vec![Complex64::default(); big.iter().product()];
    remap(src, dims, &mut out, &big, true);
    out
}

/// Inverse of [`pad_spectrum`]: keeps the wavenumbers representable on `dims`.
pub fn truncate_spectrum(src: &[Complex64], big: &[usize], dims: &[usize]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); dims.iter().product()];
    remap(src, big, &mut out, dims, false);
    out
}

fn wrap(k: usize, n: usize, to: usize) -> usize {
    if k < n / 2 {
        k
    } else {
        to - (n - k)
    }
}

// Copies between a small lattice `small` and a large lattice `large`. The
// direction flag says whether `a` is the small one.
fn remap(a: &[Complex64], adims: &[usize], b: &mut [Complex64], bdims: &[usize], small_to_large: bool) {
    let (small, large) = if small_to_large {
        (adims, bdims)
    } else {
        (bdims, adims)
    };
    let d = small.len();
    let total: usize = small.iter().product();
    let mut idx_small = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for ax in (0..d).rev() {
            idx_small[ax] = rem % small[ax];
            rem /= small[ax];
        }
        let mut flat_large = 0usize;
        for ax in 0..d {
            flat_large = flat_large * large[ax] + wrap(idx_small[ax], small[ax], large[ax]);
        }
        if small_to_large {
            b[flat_large] = a[flat];
        } else {
            b[flat] = a[flat_large];
        }
    }
}
