//! Pseudo-spectral incompressible Navier-Stokes solver on the 2*pi-periodic
//! torus, with verification kernels for Fourier-Lebesgue critical-space
//! bounds: trajectory norms, small-data a-priori estimates, frequency
//! splitting, Duhamel fixed-point iteration, perturbation stability, and
//! continuum radial quadrature oracles.

pub mod config;
pub mod continuum;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod picard;
pub mod splitting;
pub mod stability;

pub use error::{Error, Result};
pub use field::{ScalarSpectralField, SpectralVectorField};
pub use grid::{make_grid, Grid};
pub use norms::NormReport;
