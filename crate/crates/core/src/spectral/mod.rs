//! Functional calculus of `-Δ` and `-Δ_V`: distorted Fourier transform,
//! multipliers, fractional powers, resolvents and Littlewood–Paley pieces.

pub mod basis;
pub mod equivalence;
pub mod kato;
pub mod littlewood_paley;
pub mod multiplier;
pub mod resolvent;

pub use basis::{BasisOptions, BoundStatePolicy, DistortedBasis};

pub use multiplier::Calculus;
