//! Uniform truncated line and its matched Fourier lattice.
//!
//! All fields live on `x_i = -L + i dx`, `i = 0..N`, with `dx = 2L/N`. The dual
//! lattice is `xi_k = (k - N/2) dxi` with `dxi = pi/L`, stored in increasing
//! order. The transform uses the `e^{+i xi x}` kernel:
//!
//! ```text
//! F f(xi)    = (2 pi)^{-1/2} \int e^{+i xi x} f(x) dx
//! F^{-1} g(x) = (2 pi)^{-1/2} \int e^{-i xi x} g(xi) dxi
//! ```
//!
//! discretized by the trapezoidal rule, which on the periodic lattice is the
//! unitary DFT.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform grid on `[-L, L)` with `N` nodes and the matched dual lattice.
#[derive(Clone)]
pub struct SpatialGrid {
    half_width: f64,
    points: usize,
    plans: Plans,
}

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("half_width", &self.half_width)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for SpatialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.half_width == other.half_width && self.points == other.points
    }
}

/// Builds a grid after validating `N` (even, at least 16) and `L > 0`.
pub fn make_grid(half_width: f64, points: usize) -> Result<SpatialGrid> {
    SpatialGrid::new(half_width, points)
}

impl SpatialGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {points}"
            )));
        }
        if !points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("point count must be even, got {points}")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        };
        Ok(Self { half_width, points, plans })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Spacing of the dual lattice, `pi / L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.dxi()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.xi(k)).collect()
    }

    /// Largest resolved frequency, `pi / dx`.
    pub fn max_frequency(&self) -> f64 {
        PI / self.dx()
    }

    /// Index of the zero frequency.
    pub fn zero_index(&self) -> usize {
        self.points / 2
    }

    /// Index of `-xi_k`; the Nyquist node maps to itself.
    pub fn mirror(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.points - k
        }
    }

    /// Refined copy with `factor` times as many points on the same interval.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_width, self.points * factor.max(1))
    }

    pub fn check(&self, samples: usize) -> Result<()> {
        if samples != self.points {
            return Err(Error::GridMismatch { expected: self.points, found: samples });
        }
        Ok(())
    }

    // sign of e^{-i xi_k L} = (-1)^(k - N/2)
    fn parity(&self, k: usize) -> f64 {
        if (k + self.points / 2).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `S_k = sum_i e^{+i xi_k x_i} g_i` (no quadrature weight).
    pub fn sum_plus(&self, g: &[C64]) -> Vec<C64> {
        let n = self.points;
        let mut buf = g.to_vec();
        self.plans.inverse.process(&mut buf);
        let half = n / 2;
        (0..n)
            .map(|k| {
                let m = (k + n - half) % n;
                buf[m] * self.parity(k)
            })
            .collect()
    }

    /// `s_i = sum_k e^{-i xi_k x_i} G_k` (no quadrature weight).
    pub fn sum_minus_dual(&self, spectrum: &[C64]) -> Vec<C64> {
        let n = self.points;
        let half = n / 2;
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (k, value) in spectrum.iter().enumerate() {
            let m = (k + n - half) % n;
            buf[m] = value * self.parity(k);
        }
        self.plans.forward.process(&mut buf);
        buf
    }

    /// `s_i = sum_k e^{+i xi_k x_i} G_k` (no quadrature weight).
    pub fn sum_plus_dual(&self, spectrum: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = spectrum.iter().map(|z| z.conj()).collect();
        self.sum_minus_dual(&conj).into_iter().map(|z| z.conj()).collect()
    }

    /// Unitary forward transform with the `e^{+i xi x}` kernel.
    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        let scale = self.dx() / (2.0 * PI).sqrt();
        self.sum_plus(f).into_iter().map(|z| z * scale).collect()
    }

    /// Inverse of [`SpatialGrid::forward`].
    pub fn inverse(&self, spectrum: &[C64]) -> Vec<C64> {
        let scale = self.dxi() / (2.0 * PI).sqrt();
        self.sum_minus_dual(spectrum).into_iter().map(|z| z * scale).collect()
    }

    /// Applies the Fourier multiplier `symbol(xi)`.
    pub fn apply_symbol<F>(&self, f: &[C64], symbol: F) -> Vec<C64>
    where
        F: Fn(f64) -> C64,
    {
        let mut spec = self.forward(f);
        for (k, value) in spec.iter_mut().enumerate() {
            *value *= symbol(self.xi(k));
        }
        self.inverse(&spec)
    }

    /// Spectral first derivative. With the `e^{+i xi x}` kernel, `d/dx` has
    /// symbol `-i xi`; the Nyquist mode is dropped.
    pub fn derivative(&self, f: &[C64]) -> Vec<C64> {
        let nyquist = -self.max_frequency();
        self.apply_symbol(f, |xi| {
            if xi <= nyquist + 0.5 * self.dxi() {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, -xi)
            }
        })
    }

    /// Spectral second derivative (symbol `-xi^2`).
    pub fn second_derivative(&self, f: &[C64]) -> Vec<C64> {
        self.apply_symbol(f, |xi| C64::new(-xi * xi, 0.0))
    }

    /// Trapezoidal quadrature of real samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx()
    }

    pub fn l2_norm(&self, f: &[C64]) -> f64 {
        (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>() * self.dx()
    }

    /// `L^2` norm of a dual-lattice field.
    pub fn spectral_l2_norm(&self, spectrum: &[C64]) -> f64 {
        (spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dxi()).sqrt()
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.points).map(|i| f(self.x(i))).collect()
    }

    pub fn sample_real<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.points).map(|i| f(self.x(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &SpatialGrid) -> Vec<C64> {
        grid.sample(|x| C64::new((-x * x / 2.0).exp(), 0.0))
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_grid(10.0, 4), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(10.0, 33), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(0.0, 64), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(-1.0, 64), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(f64::NAN, 64), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn default_grid_spacing() {
        let grid = make_grid(40.0, 2048).unwrap();
        assert_eq!(grid.dx(), 0.0390625);
        assert_eq!(grid.dx() * grid.len() as f64, 80.0);
        // independent recomputation of pi/dx
        let expected = std::f64::consts::PI / (80.0 / 2048.0);
        assert!((grid.max_frequency() - expected).abs() < 1e-12);
        assert!((grid.max_frequency() - 80.42).abs() < 5e-3);
    }

    #[test]
    fn dual_lattice_is_symmetric() {
        let grid = make_grid(5.0, 64).unwrap();
        for k in 1..grid.len() {
            assert!((grid.xi(k) + grid.xi(grid.mirror(k))).abs() < 1e-12);
        }
        assert!((grid.xi(0) + grid.max_frequency()).abs() < 1e-12);
        assert_eq!(grid.xi(grid.zero_index()), 0.0);
    }

    #[test]
    fn zero_maps_to_zero() {
        let grid = make_grid(10.0, 64).unwrap();
        let zero = vec![C64::new(0.0, 0.0); 64];
        assert!(grid.forward(&zero).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_is_self_dual() {
        let grid = make_grid(40.0, 2048).unwrap();
        let spec = grid.forward(&gaussian(&grid));
        for (k, value) in spec.iter().enumerate() {
            let xi = grid.xi(k);
            assert!((value - C64::new((-xi * xi / 2.0).exp(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn transform_matches_direct_quadrature() {
        // direct O(N^2) evaluation of the e^{+i xi x} kernel
        let grid = make_grid(8.0, 64).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp() * (1.0 + x), 0.3 * x * (-x * x).exp()));
        let spec = grid.forward(&f);
        for k in 0..grid.len() {
            let xi = grid.xi(k);
            let direct: C64 = (0..grid.len())
                .map(|i| C64::from_polar(1.0, xi * grid.x(i)) * f[i])
                .sum::<C64>()
                * grid.dx()
                / (2.0 * PI).sqrt();
            assert!((direct - spec[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_sign_follows_kernel() {
        let grid = make_grid(20.0, 512).unwrap();
        let f = gaussian(&grid);
        let df = grid.derivative(&f);
        for i in 0..grid.len() {
            let x = grid.x(i);
            assert!((df[i] - C64::new(-x * (-x * x / 2.0).exp(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip_and_isometry() {
        let grid = make_grid(12.0, 256).unwrap();
        let f = grid.sample(|x| C64::new((-(x - 1.0).powi(2)).exp(), (-(x + 2.0).powi(2) / 3.0).exp()));
        let spec = grid.forward(&f);
        let back = grid.inverse(&spec);
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((grid.l2_norm(&f) - grid.spectral_l2_norm(&spec)).abs() < 1e-12);
    }
}
