//! The resolvent `(τ - Δ_V)^{-1}` for `τ > 0` by a banded solve.
//!
//! `-∂²` is discretized with the fourth-order five-point stencil. Outside the
//! grid the solution is continued by the decaying exterior mode
//! `u(x) ∝ e^{-√τ|x|}`, which closes the first and last two rows.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::potential::Potential;

const ZERO: C64 = C64::new(0.0, 0.0);

/// LU factors of the pentadiagonal matrix `τ - Δ_V`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    tau: f64,
    /// `band[i][d]` holds the entry in column `i + d - 2` after elimination.
    band: Vec<[f64; 5]>,
    /// Multipliers of the eliminated subdiagonals.
    lower: Vec<[f64; 2]>,
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Rows of `τ - Δ_V` with the exterior continuation folded in.
fn assemble(grid: &SpatialGrid, samples: &[f64], tau: f64) -> Vec<[f64; 5]> {
    let n = grid.len();
    let dx = grid.dx();
    let c = 1.0 / (12.0 * dx * dx);
    let rho = (-tau.sqrt() * dx).exp();
    let mut band = vec![[c, -16.0 * c, 30.0 * c + tau, -16.0 * c, c]; n];
    for (row, v) in band.iter_mut().zip(samples) {
        row[2] += v;
    }
    // u_{-1} = ρ u_0, u_{-2} = ρ² u_0 and symmetrically on the right
    band[0][2] += c * (rho * rho - 16.0 * rho);
    band[1][1] += c * rho;
    band[n - 1][2] += c * (rho * rho - 16.0 * rho);
    band[n - 2][3] += c * rho;
    for d in 0..2 {
        band[0][d] = 0.0;
        band[n - 1][4 - d] = 0.0;
    }
    band[1][0] = 0.0;
    band[n - 2][4] = 0.0;
    band
}

impl Resolvent {
    pub fn new(v: &Potential, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolvent needs tau > 0, got {tau}")));
        }
        let n = v.grid.len();
        let mut band = assemble(&v.grid, &v.samples, tau);
        let mut lower = vec![[0.0; 2]; n];
        let scale = band.iter().map(|r| r[2].abs()).fold(0.0, f64::max);
        for k in 0..n {
            let pivot = band[k][2];
            if !(pivot.abs() > 1e-13 * scale) {
                return Err(Error::Solver(format!("vanishing pivot {pivot:.3e} in row {k} at tau = {tau:.4e}")));
            }
            for r in 1..=2 {
                let i = k + r;
                if i >= n {
                    break;
                }
                let factor = band[i][2 - r] / pivot;
                lower[i][2 - r] = factor;
                band[i][2 - r] = 0.0;
                for c in 1..=2 {
                    if k + c < n {
                        band[i][2 - r + c] -= factor * band[k][2 + c];
                    }
                }
            }
        }
        Ok(Self { tau, band, lower })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn solve(&self, f: &[C64]) -> Result<Vec<C64>> {
        let n = self.band.len();
        if f.len() != n {
            return Err(Error::GridMismatch { expected: n, found: f.len() });
        }
        let mut y = f.to_vec();
        for i in 0..n {
            for r in 1..=2 {
                if i >= r {
                    let l = self.lower[i][2 - r];
                    y[i] = y[i] - y[i - r] * l;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for c in 1..=2 {
                if i + c < n {
                    acc -= y[i + c] * self.band[i][2 + c];
                }
            }
            y[i] = acc / self.band[i][2];
        }
        Ok(y)
    }
}

/// `(τ - Δ_V)^{-1} f`.
pub fn resolvent_apply(v: &Potential, tau: f64, f: &[C64]) -> Result<Vec<C64>> {
    v.grid.check(f.len())?;
    Resolvent::new(v, tau)?.solve(f)
}

/// The discrete operator `τ - Δ_V` the resolvent inverts.
pub fn apply_shifted(v: &Potential, tau: f64, u: &[C64]) -> Result<Vec<C64>> {
    v.grid.check(u.len())?;
    let band = assemble(&v.grid, &v.samples, tau);
    let n = u.len();
    Ok((0..n)
        .map(|i| {
            let mut acc = ZERO;
            for (d, a) in band[i].iter().enumerate() {
                let col = i as isize + d as isize - 2;
                if (0..n as isize).contains(&col) && *a != 0.0 {
                    acc += u[col as usize] * a;
                }
            }
            acc
        })
        .collect())
}

/// `‖(τ - Δ_V)u - f‖₂ / ‖f‖₂`.
pub fn resolvent_residual(v: &Potential, tau: f64, u: &[C64], f: &[C64]) -> Result<f64> {
    let lu = apply_shifted(v, tau, u)?;
    let diff: Vec<C64> = lu.iter().zip(f).map(|(a, b)| a - b).collect();
    Ok(v.grid.l2_norm(&diff) / v.grid.l2_norm(f))
}

/// `‖u‖_{L¹(ℝ)}` for a resolvent output, adding the exterior exponential
/// tails `|u_edge| / √τ` to the grid quadrature.
pub fn whole_line_l1(grid: &SpatialGrid, tau: f64, u: &[C64]) -> f64 {
    let n = grid.len();
    let inner = grid.integrate(&u.iter().map(|z| z.norm()).collect::<Vec<_>>());
    inner + (u[0].norm() + u[n - 1].norm()) / tau.sqrt()
}

/// `∫ e^{-√τ|x-y|} w(y) dy` at every node by two exponential recursions.
fn exponential_smoothing(grid: &SpatialGrid, tau: f64, w: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let decay = (-tau.sqrt() * grid.dx()).exp();
    let mut from_left = vec![0.0; n];
    let mut from_right = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc = acc * decay + w[i];
        from_left[i] = acc;
    }
    acc = 0.0;
    for i in (0..n).rev() {
        acc = acc * decay + w[i];
        from_right[i] = acc;
    }
    (0..n).map(|i| (from_left[i] + from_right[i] - w[i]) * grid.dx()).collect()
}

/// Smallest `C` with `|R(τ)f(x)| ≤ C⟨τ⟩^{-1/2} ∫ e^{-√τ|x-y|}⟨y⟩|f(y)| dy`
/// at every node where the right side is not negligible.
pub fn pointwise_bound_constant(v: &Potential, tau: f64, f: &[C64]) -> Result<f64> {
    let grid = &v.grid;
    let u = resolvent_apply(v, tau, f)?;
    let weights: Vec<f64> = (0..grid.len()).map(|i| japanese(grid.x(i)) * f[i].norm()).collect();
    let envelope = exponential_smoothing(grid, tau, &weights);
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let bracket = japanese(tau).sqrt();
    Ok(u.iter()
        .zip(&envelope)
        .filter(|(_, e)| **e > 1e-12 * peak)
        .map(|(z, e)| z.norm() * bracket / e)
        .fold(0.0, f64::max))
}

/// `(τ - Δ_V)^{-1} V₁ (τ - Δ_V)^{-1} f` with `V₁ = 2V + xV'`.
pub fn sandwich(v: &Potential, tau: f64, f: &[C64]) -> Result<Vec<C64>> {
    v.grid.check(f.len())?;
    let r = Resolvent::new(v, tau)?;
    let v1 = v.virial_samples();
    let mut inner = r.solve(f)?;
    inner.iter_mut().zip(&v1).for_each(|(z, w)| *z *= w);
    r.solve(&inner)
}

/// `‖R V₁ R f‖₁ τ⟨τ⟩ / ‖f‖_∞`.
pub fn sandwich_bound_constant(v: &Potential, tau: f64, f: &[C64]) -> Result<f64> {
    let out = sandwich(v, tau, f)?;
    let sup = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup == 0.0 {
        return Ok(0.0);
    }
    Ok(whole_line_l1(&v.grid, tau, &out) * tau * japanese(tau) / sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::potential::{sample_potential, Descriptor};

    #[test]
    fn zero_data_gives_zero() {
        let grid = make_grid(40.0, 1024).unwrap();
        let v = Potential::zero(&grid);
        let u = resolvent_apply(&v, 1.0, &vec![ZERO; 1024]).unwrap();
        assert!(u.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn free_green_function_away_from_a_narrow_bump() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = Potential::zero(&grid);
        let eps: f64 = 0.25;
        let norm = eps * (2.0 * std::f64::consts::PI).sqrt();
        let f = grid.sample(|x| C64::new((-x * x / (2.0 * eps * eps)).exp() / norm, 0.0));
        let u = resolvent_apply(&v, 1.0, &f).unwrap();
        for i in 0..grid.len() {
            let x = grid.x(i);
            if x.abs() >= 2.0 {
                let exact = 0.5 * (-x.abs()).exp() * (eps * eps / 2.0).exp();
                assert!((u[i].re - exact).abs() < 1e-6, "x = {x}: {} vs {exact}", u[i].re);
            }
        }
    }

    #[test]
    fn residual_of_barrier_solve() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = sample_potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 }, &grid).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()));
        let u = resolvent_apply(&v, 4.0, &f).unwrap();
        assert!(resolvent_residual(&v, 4.0, &u, &f).unwrap() < 1e-10);
    }

    #[test]
    fn resolvent_identity() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = sample_potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 }, &grid).unwrap();
        let f = grid.sample(|x| C64::new((-(x - 1.0).powi(2)).exp(), 0.0));
        let (a, b) = (0.7, 3.0);
        let ra = resolvent_apply(&v, a, &f).unwrap();
        let rb = resolvent_apply(&v, b, &f).unwrap();
        let rab = resolvent_apply(&v, a, &rb).unwrap();
        let diff: Vec<C64> = (0..grid.len()).map(|i| ra[i] - rb[i] - (b - a) * rab[i]).collect();
        assert!(grid.l2_norm(&diff) < 1e-8 * grid.l2_norm(&ra));
    }

    #[test]
    fn rejects_nonpositive_tau() {
        let grid = make_grid(40.0, 256).unwrap();
        let v = Potential::zero(&grid);
        assert!(Resolvent::new(&v, 0.0).is_err());
        assert!(Resolvent::new(&v, -1.0).is_err());
    }

    #[test]
    fn bound_constants_are_finite() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = sample_potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 }, &grid).unwrap();
        let f = grid.sample(|x| C64::new((-x * x / 4.0).exp(), 0.0));
        for tau in [0.01, 1.0, 100.0] {
            let c = pointwise_bound_constant(&v, tau, &f).unwrap();
            let d = sandwich_bound_constant(&v, tau, &f).unwrap();
            assert!(c.is_finite() && c > 0.0);
            assert!(d.is_finite() && d > 0.0);
        }
    }
}
