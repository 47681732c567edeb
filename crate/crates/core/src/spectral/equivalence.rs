//! Comparison of the homogeneous norms `‖(-Δ)^{s/2} f‖₂` and
//! `‖(-Δ_V)^{s/2} f‖₂`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::spectral::multiplier::Calculus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormRatio {
    pub free: f64,
    pub potential: f64,
    /// `potential / free`.
    pub ratio: f64,
}

/// Both homogeneous norms of `f` and their ratio.
pub fn norm_equiv_ratio(free: &Calculus, potential: &Calculus, s: f64, f: &[C64]) -> Result<NormRatio> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("regularity must be >= 0, got {s}")));
    }
    let a = free.homogeneous_norm(s, f)?;
    let b = potential.homogeneous_norm(s, f)?;
    Ok(NormRatio { free: a, potential: b, ratio: b / a })
}

/// Twenty Schwartz test functions: shifted, modulated Gaussians and
/// Hermite-type profiles of varying width.
pub fn equivalence_battery(grid: &SpatialGrid) -> Vec<Vec<C64>> {
    let reach = 0.1 * grid.half_width();
    let band = 0.1 * grid.max_frequency();
    (0..20)
        .map(|j| {
            let jf = j as f64;
            let width = 0.5 + 0.15 * jf;
            let centre = ((jf * 0.37).sin() * 0.6 * reach).clamp(-reach, reach);
            let freq = ((jf - 10.0) * 0.35).clamp(-band, band);
            let order = j % 3;
            grid.sample(|x| {
                let y = (x - centre) / width;
                let poly = match order {
                    0 => 1.0,
                    1 => y,
                    _ => y * y - 0.5,
                };
                C64::from_polar(poly * (-0.5 * y * y).exp(), freq * x)
            })
        })
        .collect()
}

/// `C = max over the battery of max(r, 1/r)`.
pub fn equivalence_constant(ratios: &[NormRatio]) -> f64 {
    ratios.iter().map(|r| r.ratio.max(1.0 / r.ratio)).fold(1.0, f64::max)
}
