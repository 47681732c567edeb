//! Dyadic decomposition in the spectral variable `τ = √λ`.
//!
//! `χ` is a smooth step equal to 1 on `[0, 1]` and 0 on `[2, ∞)`, and
//! `φ(τ) = χ(τ) - χ(2τ)` is supported in `[1/2, 2]`. The pieces `φ(2^{-j}τ)`
//! telescope, so `Σ_{j=a}^{b} φ(2^{-j}τ) = χ(2^{-b}τ) - χ(2^{1-a}τ)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::spectral::multiplier::Calculus;
use crate::table::Table;

/// Fewest lattice modes a resolved band may hold.
pub const MIN_BAND_MODES: f64 = 8.0;

fn bump(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn chi(tau: f64) -> f64 {
    let t = tau.abs();
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let a = bump(2.0 - t);
    a / (a + bump(t - 1.0))
}

/// Annular cutoff supported in `1/2 ≤ |τ| ≤ 2`.
pub fn phi(tau: f64) -> f64 {
    chi(tau) - chi(2.0 * tau)
}

/// Range of dyadic indices used for a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LpWindow {
    pub j_min: i32,
    pub j_max: i32,
}

impl LpWindow {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidParameter(format!("empty dyadic range [{j_min}, {j_max}]")));
        }
        Ok(Self { j_min, j_max })
    }

    /// All bands holding at least [`MIN_BAND_MODES`] lattice modes and lying
    /// below the lattice edge.
    pub fn resolved(grid: &SpatialGrid) -> Result<Self> {
        let dxi = grid.dxi();
        let top = grid.max_frequency();
        let j_min = (MIN_BAND_MODES * dxi / 1.5).log2().ceil() as i32;
        let j_max = (top / 2.0).log2().floor() as i32;
        Self::new(j_min, j_max)
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn piece(j: i32, tau: f64) -> f64 {
        phi(tau.abs() * (-j as f64).exp2())
    }

    /// Everything below the lowest band, `χ(2^{1-j_min}τ)`.
    pub fn low_remainder(&self, tau: f64) -> f64 {
        chi(tau.abs() * ((1 - self.j_min) as f64).exp2())
    }

    /// Everything above the highest band, `1 - χ(2^{-j_max}τ)`.
    pub fn high_remainder(&self, tau: f64) -> f64 {
        1.0 - chi(tau.abs() * (-self.j_max as f64).exp2())
    }

    /// `max |1 - Σ_j φ(2^{-j}τ)|` over lattice nodes in `[2^{j_min}, 2^{j_max}]`.
    pub fn partition_residual(&self, grid: &SpatialGrid) -> f64 {
        let (lo, hi) = ((self.j_min as f64).exp2(), (self.j_max as f64).exp2());
        grid.frequencies()
            .into_iter()
            .map(f64::abs)
            .filter(|t| *t >= lo && *t <= hi)
            .map(|t| (1.0 - self.indices().map(|j| Self::piece(j, t)).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

/// Dyadic energies of one field.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicEnergies {
    pub window: LpWindow,
    /// `∫ φ(2^{-j}τ) |F f(τ)|² dτ`.
    pub pairing: Vec<f64>,
    /// `‖φ(2^{-j}√(-Δ)) f‖₂²`.
    pub squared: Vec<f64>,
    pub low: f64,
    pub high: f64,
    /// `‖F f‖₂²` on the lattice.
    pub total: f64,
}

impl DyadicEnergies {
    /// `low + Σ_j e_j + high`, which telescopes to `total`.
    pub fn sum(&self) -> f64 {
        self.low + self.pairing.iter().sum::<f64>() + self.high
    }

    /// `Σ_j 2^{2js} e_j`, with the remainders weighted as the bands adjacent
    /// to the window.
    pub fn weighted_sum(&self, s: f64) -> f64 {
        let w = |j: i32| (2.0 * s * j as f64).exp2();
        let bands: f64 = self.window.indices().zip(&self.pairing).map(|(j, e)| w(j) * e).sum();
        bands + w(self.window.j_min - 1) * self.low + w(self.window.j_max + 1) * self.high
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["j", "pairing", "squared"]);
        for (j, (p, q)) in self.window.indices().zip(self.pairing.iter().zip(&self.squared)) {
            table.push(vec![j as f64, *p, *q]);
        }
        table
    }
}

/// Dyadic energies of `f` for `-Δ` or `-Δ_V`.
pub fn lp_analysis(calc: &Calculus, f: &[C64], window: &LpWindow) -> Result<DyadicEnergies> {
    let grid = calc.grid();
    let spec = calc.forward(f)?;
    let dxi = grid.dxi();
    let taus = grid.frequencies();
    let weighted = |g: &dyn Fn(f64) -> f64, power: i32| -> f64 {
        taus.iter().zip(&spec).map(|(t, z)| g(*t).powi(power) * z.norm_sqr()).sum::<f64>() * dxi
    };
    let pairing = window.indices().map(|j| weighted(&|t| LpWindow::piece(j, t), 1)).collect();
    let squared = window.indices().map(|j| weighted(&|t| LpWindow::piece(j, t), 2)).collect();
    Ok(DyadicEnergies {
        window: *window,
        pairing,
        squared,
        low: weighted(&|t| window.low_remainder(t), 1),
        high: weighted(&|t| window.high_remainder(t), 1),
        total: weighted(&|_| 1.0, 1),
    })
}

/// `φ(2^{-j}√(-Δ_V)) f`, or the free piece.
pub fn lp_piece(calc: &Calculus, j: i32, f: &[C64]) -> Result<Vec<C64>> {
    calc.apply_multiplier(f, |lambda| C64::new(LpWindow::piece(j, lambda.sqrt()), 0.0))
}

/// A field whose free spectrum is `φ(2^{-k}|ξ|)` times a smooth phase, so
/// that it is supported in `2^{k-1} ≤ |ξ| ≤ 2^{k+1}`, centred near `x = shift`.
pub fn band_limited_field(grid: &SpatialGrid, k: i32, shift: f64) -> Vec<C64> {
    let scale = (k as f64).exp2();
    let spec: Vec<C64> = grid
        .frequencies()
        .into_iter()
        .map(|xi| C64::from_polar(LpWindow::piece(k, xi), -xi * shift) * (1.0 + 0.3 * (xi / scale)))
        .collect();
    grid.inverse(&spec)
}

/// Fraction of free spectral mass outside `2^{k-1} ≤ |ξ| ≤ 2^{k+1}`.
pub fn band_leakage(grid: &SpatialGrid, k: i32, f: &[C64]) -> f64 {
    let spec = grid.forward(f);
    let (lo, hi) = ((k as f64 - 1.0).exp2(), (k as f64 + 1.0).exp2());
    let mut outside = 0.0;
    let mut total = 0.0;
    for (xi, z) in grid.frequencies().into_iter().zip(&spec) {
        let m = z.norm_sqr();
        total += m;
        if xi.abs() < lo || xi.abs() > hi {
            outside += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

/// One entry of the quasi-diagonality sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuasidiagEntry {
    pub j: i32,
    pub k: i32,
    /// `⟨φ(2^{-j}√(-Δ_V)) f_k, f_k⟩`.
    pub pairing: f64,
    /// `2^{-|k-j|} ‖f_k‖₂²`.
    pub bound: f64,
    pub ratio: f64,
}

/// Relative free mass tolerated outside the band of `f_k`.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;

/// Pairs the `j`-th spectral piece of `calc` against a field `f_k` whose free
/// spectrum lies in the `k`-th dyadic annulus.
pub fn quasidiag_check(calc: &Calculus, j: i32, k: i32, f_k: &[C64]) -> Result<QuasidiagEntry> {
    let grid = calc.grid();
    let leak = band_leakage(grid, k, f_k);
    if leak > SUPPORT_TOLERANCE {
        return Err(Error::Support(format!("free spectrum of f_k leaks {leak:.3e} outside band {k}")));
    }
    let spec = calc.forward(f_k)?;
    let pairing = grid
        .frequencies()
        .into_iter()
        .zip(&spec)
        .map(|(t, z)| LpWindow::piece(j, t) * z.norm_sqr())
        .sum::<f64>()
        * grid.dxi();
    let bound = (-(k - j).abs() as f64).exp2() * grid.l2_norm(f_k).powi(2);
    Ok(QuasidiagEntry { j, k, pairing, bound, ratio: pairing / bound })
}

/// `max ratio` at each distance `|k - j| = 0, 1, ...`.
pub fn envelope(entries: &[QuasidiagEntry]) -> Vec<f64> {
    let top = entries.iter().map(|e| (e.k - e.j).unsigned_abs() as usize).max().unwrap_or(0);
    let mut env = vec![0.0_f64; top + 1];
    for e in entries {
        let d = (e.k - e.j).unsigned_abs() as usize;
        env[d] = env[d].max(e.ratio);
    }
    env
}

/// The envelope never rises by more than `slack` (relative) from one
/// distance to the next.
pub fn envelope_non_growing(env: &[f64], slack: f64) -> bool {
    env.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn partition_of_unity_on_resolved_band() {
        let grid = make_grid(40.0, 2048).unwrap();
        let w = LpWindow::resolved(&grid).unwrap();
        assert!(w.partition_residual(&grid) < 1e-10);
        for t in [0.01, 0.3, 1.0, 7.5, 60.0, 200.0] {
            let total = w.low_remainder(t) + w.indices().map(|j| LpWindow::piece(j, t)).sum::<f64>() + w.high_remainder(t);
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cutoff_support() {
        assert_eq!(phi(0.49), 0.0);
        assert_eq!(phi(2.01), 0.0);
        assert!(phi(1.0) > 0.0);
    }

    #[test]
    fn resolved_band_has_enough_modes() {
        let grid = make_grid(40.0, 2048).unwrap();
        let w = LpWindow::resolved(&grid).unwrap();
        assert!(1.5 * (w.j_min as f64).exp2() / grid.dxi() >= MIN_BAND_MODES);
        assert!((w.j_max as f64 + 1.0).exp2() <= grid.max_frequency());
    }

    #[test]
    fn free_energies_sum_to_norm() {
        let grid = make_grid(40.0, 2048).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.0));
        let w = LpWindow::resolved(&grid).unwrap();
        let e = lp_analysis(&Calculus::Free(&grid), &f, &w).unwrap();
        assert!((e.sum() - grid.l2_norm(&f).powi(2)).abs() < 1e-8);
    }

    #[test]
    fn band_limited_field_concentrates() {
        let grid = make_grid(40.0, 2048).unwrap();
        let w = LpWindow::resolved(&grid).unwrap();
        let k = 2;
        let f = band_limited_field(&grid, k, 0.0);
        assert!(band_leakage(&grid, k, &f) < 1e-12);
        let e = lp_analysis(&Calculus::Free(&grid), &f, &w).unwrap();
        for (j, value) in w.indices().zip(&e.pairing) {
            if (j - k).abs() >= 2 {
                assert!(*value < 1e-12 * e.total, "band {j} holds {value}");
            }
        }
    }

    #[test]
    fn free_quasidiag_vanishes_off_diagonal() {
        let grid = make_grid(40.0, 2048).unwrap();
        let calc = Calculus::Free(&grid);
        let f = band_limited_field(&grid, 1, 0.0);
        for j in [-1, 3, 4] {
            let entry = quasidiag_check(&calc, j, 1, &f).unwrap();
            assert!(entry.pairing.abs() < 1e-10);
        }
    }

    #[test]
    fn support_violation_is_rejected() {
        let grid = make_grid(40.0, 2048).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.0));
        assert!(matches!(quasidiag_check(&Calculus::Free(&grid), 0, 2, &f), Err(Error::Support(_))));
    }

    #[test]
    fn envelope_by_distance() {
        let entries = [
            QuasidiagEntry { j: 0, k: 0, pairing: 1.0, bound: 1.0, ratio: 0.9 },
            QuasidiagEntry { j: 0, k: 1, pairing: 0.2, bound: 0.5, ratio: 0.4 },
            QuasidiagEntry { j: 2, k: 1, pairing: 0.1, bound: 0.5, ratio: 0.2 },
        ];
        assert_eq!(envelope(&entries), vec![0.9, 0.4]);
        assert!(envelope_non_growing(&[0.9, 0.4, 0.1], 0.1));
        assert!(!envelope_non_growing(&[0.1, 0.4], 0.1));
    }
}
