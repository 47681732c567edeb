//! Spectral scattering calculus for `Δ_V = ∂² - V` on the line.
//!
//! The crate builds Jost solutions and scattering data for a short-range
//! potential, the distorted Fourier transform they generate, spectral
//! multipliers of `-Δ_V` (including fractional powers by the multiplier and
//! Kato-resolvent routes), the gauged vector-field operators `|J(t)|^s` and
//! `|J_V(t)|^s`, and a split-step solver for
//! `(i∂_t + Δ_V)u + λ|u|^{p-1}u = 0` with decay and scattering diagnostics.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod jost;
pub mod norms;
pub mod operators;
pub mod potential;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
pub use field::WaveField;
pub use grid::{make_grid, SpatialGrid};
pub use potential::{sample_potential, Descriptor, Potential};

pub use num_complex::Complex64 as C64;
