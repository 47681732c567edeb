//! Weighted Lebesgue norms `||<x>^s f||_{L^p}` and the `Sigma_s` norm.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Exponent::One)
        } else if p == 2.0 {
            Ok(Exponent::Two)
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::UnsupportedExponent(p))
        }
    }
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Trapezoidal `||<x>^s f||_{L^p}` for `p` in `{1, 2, inf}`.
pub fn weighted_norm(grid: &SpatialGrid, f: &[C64], p: f64, s: f64) -> Result<f64> {
    grid.check(f.len())?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("weight order must be >= 0, got {s}")));
    }
    let weighted = f.iter().enumerate().map(|(i, z)| japanese(grid.x(i)).powf(s) * z.norm());
    Ok(match Exponent::try_from(p)? {
        Exponent::One => weighted.sum::<f64>() * grid.dx(),
        Exponent::Two => (weighted.map(|w| w * w).sum::<f64>() * grid.dx()).sqrt(),
        Exponent::Infinity => weighted.fold(0.0, f64::max),
    })
}

pub fn sup_norm(f: &[C64]) -> f64 {
    f.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(||f||_{H^s}^2 + |||x|^s f||_{L^2}^2)^{1/2}`, with the Sobolev part taken
/// through the multiplier `<xi>^s`.
pub fn sigma_norm(grid: &SpatialGrid, f: &[C64], s: f64) -> Result<f64> {
    grid.check(f.len())?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("regularity must be >= 0, got {s}")));
    }
    let spec = grid.forward(f);
    let sobolev: f64 = spec
        .iter()
        .enumerate()
        .map(|(k, z)| japanese(grid.xi(k)).powf(2.0 * s) * z.norm_sqr())
        .sum::<f64>()
        * grid.dxi();
    let moment: f64 = f
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let w = if s == 0.0 { 1.0 } else { grid.x(i).abs().powf(s) };
            w * w * z.norm_sqr()
        })
        .sum::<f64>()
        * grid.dx();
    Ok((sobolev + moment).sqrt())
}
