//! Spectral simulation and verification toolkit for sigma-averaged dispersion-managed
//! Schrödinger equations
//!
//! `i u_t + gamma Delta u + int_0^1 e^{-i sigma Delta}[|e^{i sigma Delta} u|^p e^{i sigma Delta} u] d sigma = 0`
//!
//! on periodic boxes in one to three dimensions.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod initial_data;
pub mod io;
pub mod nonlinearity;
pub mod picard;
pub mod spectral;

pub use error::{GtError, Result};
pub use num_complex::Complex64;
