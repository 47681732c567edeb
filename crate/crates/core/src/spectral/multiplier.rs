//! Spectral multipliers `g(-Δ)` and `g(-Δ_V)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::jost::{self, JostOptions};
use crate::potential::Potential;
use crate::spectral::basis::DistortedBasis;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Which Laplacian the functional calculus diagonalizes.
#[derive(Debug, Clone, Copy)]
pub enum Calculus<'a> {
    Free(&'a SpatialGrid),
    Potential(&'a DistortedBasis),
}

/// Rejects multipliers that are not finite or whose modulus jumps by more
/// than half its peak between neighbouring lattice nodes.
pub fn check_resolved(values: &[C64]) -> Result<()> {
    if let Some(k) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Unresolved(format!("multiplier is not finite at lattice node {k}")));
    }
    let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    for (k, pair) in values.windows(2).enumerate() {
        let jump = (pair[1].norm() - pair[0].norm()).abs();
        if jump > 0.5 * peak {
            return Err(Error::Unresolved(format!(
                "|g| jumps by {:.3} of its peak between lattice nodes {k} and {}",
                jump / peak,
                k + 1
            )));
        }
    }
    Ok(())
}

impl<'a> Calculus<'a> {
    pub fn grid(&self) -> &'a SpatialGrid {
        match self {
            Calculus::Free(grid) => grid,
            Calculus::Potential(basis) => basis.grid(),
        }
    }

    pub fn forward(&self, f: &[C64]) -> Result<Vec<C64>> {
        match self {
            Calculus::Free(grid) => {
                grid.check(f.len())?;
                Ok(grid.forward(f))
            }
            Calculus::Potential(basis) => basis.forward(f),
        }
    }

    pub fn inverse(&self, g: &[C64]) -> Result<Vec<C64>> {
        match self {
            Calculus::Free(grid) => {
                grid.check(g.len())?;
                Ok(grid.inverse(g))
            }
            Calculus::Potential(basis) => basis.inverse(g),
        }
    }

    /// Multiplier values `g(τ_k²)` on the spectral lattice.
    pub fn symbol<G: Fn(f64) -> C64>(&self, g: G) -> Vec<C64> {
        let grid = self.grid();
        (0..grid.len())
            .map(|k| {
                let tau = grid.xi(k);
                g(tau * tau)
            })
            .collect()
    }

    /// `g(-Δ) f` or `g(-Δ_V) f`, with `g` a function of the energy `λ = τ²`.
    /// With bound states kept aside, this acts on the continuous part only.
    pub fn apply_multiplier<G: Fn(f64) -> C64>(&self, f: &[C64], g: G) -> Result<Vec<C64>> {
        let symbol = self.symbol(g);
        check_resolved(&symbol)?;
        self.apply_symbol(f, &symbol)
    }

    /// As [`Calculus::apply_multiplier`] with precomputed lattice values and
    /// no resolution check.
    pub fn apply_symbol(&self, f: &[C64], symbol: &[C64]) -> Result<Vec<C64>> {
        let mut spec = self.forward(f)?;
        for (z, g) in spec.iter_mut().zip(symbol) {
            *z *= g;
        }
        self.inverse(&spec)
    }

    /// `(-Δ)^{s/2} f` or `(-Δ_V)^{s/2} f` for `s >= 0`.
    pub fn fractional_power(&self, s: f64, f: &[C64]) -> Result<Vec<C64>> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("fractional order must be >= 0, got {s}")));
        }
        if s == 0.0 {
            self.grid().check(f.len())?;
            return Ok(f.to_vec());
        }
        self.apply_multiplier(f, |lambda| C64::new(lambda.powf(s / 2.0), 0.0))
    }

    /// `‖(-Δ)^{s/2} f‖₂` or `‖(-Δ_V)^{s/2} f‖₂` read off the spectral side.
    ///
    /// The lattice sum of `|τ|^{a} g(τ)`, `a = 2s`, through the cusp at
    /// `τ = 0` differs from the integral by
    /// `2ζ(-a) h^{1+a} g(0) + ζ(-a-2) h^{3+a} g''(0) + O(h^{5+a})`;
    /// both terms are removed.
    pub fn homogeneous_norm(&self, s: f64, f: &[C64]) -> Result<f64> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("regularity must be >= 0, got {s}")));
        }
        let grid = self.grid();
        let spec = self.forward(f)?;
        let sum: f64 = spec
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let tau = grid.xi(k).abs();
                let weight = if s == 0.0 { 1.0 } else { tau.powf(s) };
                weight * weight * z.norm_sqr()
            })
            .sum();
        let h = grid.dxi();
        let mut total = sum * h;
        if s > 0.0 {
            let a = 2.0 * s;
            let z = grid.zero_index();
            let g0 = spec[z].norm_sqr();
            let curvature = (spec[z + 1].norm_sqr() - 2.0 * g0 + spec[z - 1].norm_sqr()) / (h * h);
            total -= 2.0 * zeta_negative(a) * h.powf(1.0 + a) * g0 + zeta_negative(a + 2.0) * h.powf(3.0 + a) * curvature;
        }
        Ok(total.max(0.0).sqrt())
    }
}

/// `ζ(σ)` for `σ > 1` by Euler–Maclaurin after twenty explicit terms.
fn zeta(sigma: f64) -> f64 {
    const N: f64 = 20.0;
    let head: f64 = (1..20).map(|n| (n as f64).powf(-sigma)).sum();
    let tail = N.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * N.powf(-sigma) + sigma * N.powf(-sigma - 1.0) / 12.0
        - sigma * (sigma + 1.0) * (sigma + 2.0) * N.powf(-sigma - 3.0) / 720.0
        + sigma * (sigma + 1.0) * (sigma + 2.0) * (sigma + 3.0) * (sigma + 4.0) * N.powf(-sigma - 5.0) / 30240.0;
    head + tail
}

/// `ζ(-a)` for `a > 0` through the reflection formula.
fn zeta_negative(a: f64) -> f64 {
    let (sin, z) = ((PI * a / 2.0).sin(), zeta(1.0 + a));
    // sin(πa/2) ζ(1+a) -> π/2 as a -> 0
    let product = if a < 1e-8 { PI / 2.0 } else { sin * z };
    -2.0 * (2.0 * PI).powf(-1.0 - a) * statrs::function::gamma::gamma(1.0 + a) * product
}

/// `g(-Δ_V) f` through the spectral-measure kernel
///
/// ```text
/// (1/2π) ∫ dτ g(τ²) [ T(τ) f_+(x,τ) ∫_{y<x} f_-(y,τ) f(y) dy
///                    + T(-τ) f_-(x,-τ) ∫_{y>x} f_+(y,-τ) f(y) dy ]
/// ```
///
/// evaluated on the same `τ` lattice as the distorted transform. The partial
/// integrals use the trapezoidal rule with the first Euler–Maclaurin endpoint
/// correction at `y = x`. The `τ = 0` node is skipped, so `g(0)` must vanish
/// or the potential must be generic.
pub fn kernel_multiplier<G: Fn(f64) -> C64 + Sync>(v: &Potential, f: &[C64], g: G) -> Result<Vec<C64>> {
    let grid = &v.grid;
    grid.check(f.len())?;
    let n = grid.len();
    let half = n / 2;
    let dx = grid.dx();
    let df = grid.derivative(f);
    let nodes: Vec<(f64, C64)> = (1..half)
        .map(|j| {
            let tau = j as f64 * grid.dxi();
            (tau, g(tau * tau))
        })
        .filter(|(_, value)| *value != ZERO)
        .collect();
    let contributions = nodes
        .par_iter()
        .map(|&(tau, value)| -> Result<Vec<C64>> {
            let sol = jost::solve_jost_at(v, C64::new(tau, 0.0), &JostOptions::default())?;
            let t = jost::scattering_point(v, &sol)?.t;
            let mut out = vec![ZERO; n];
            // both signs of the momentum, using m(x, -τ) = conj m(x, τ)
            for sign in [1.0, -1.0] {
                let k = sign * tau;
                let t_k = if sign > 0.0 { t } else { t.conj() };
                let pick = |m: C64| if sign > 0.0 { m } else { m.conj() };
                let fp = |i: usize| (I * k * grid.x(i)).exp() * pick(sol.m_plus[i]);
                let fm = |i: usize| (-I * k * grid.x(i)).exp() * pick(sol.m_minus[i]);
                let dfm = |i: usize| (-I * k * grid.x(i)).exp() * (-I * k * pick(sol.m_minus[i]) + pick(sol.dm_minus[i]));
                // ∫_{y<x} f_-(y,k) f(y) dy
                let mut below = vec![ZERO; n];
                let mut acc = ZERO;
                let mut prev = ZERO;
                for i in 0..n {
                    let current = fm(i) * f[i];
                    if i > 0 {
                        acc += 0.5 * dx * (prev + current);
                    }
                    let slope = dfm(i) * f[i] + fm(i) * df[i];
                    below[i] = acc - dx * dx / 12.0 * slope;
                    prev = current;
                }
                // ∫_{y>x} f_+(y,-k) f(y) dy, with f_+(y,-k) from the opposite sign
                let fp_neg = |i: usize| (-I * k * grid.x(i)).exp() * pick(sol.m_plus[i]).conj();
                let dfp_neg = |i: usize| {
                    (-I * k * grid.x(i)).exp() * (-I * k * pick(sol.m_plus[i]).conj() + pick(sol.dm_plus[i]).conj())
                };
                let fm_neg = |i: usize| (I * k * grid.x(i)).exp() * pick(sol.m_minus[i]).conj();
                let mut above = vec![ZERO; n];
                let mut acc = ZERO;
                let mut prev = ZERO;
                for i in (0..n).rev() {
                    let current = fp_neg(i) * f[i];
                    if i + 1 < n {
                        acc += 0.5 * dx * (prev + current);
                    }
                    let slope = dfp_neg(i) * f[i] + fp_neg(i) * df[i];
                    above[i] = acc + dx * dx / 12.0 * slope;
                    prev = current;
                }
                for i in 0..n {
                    out[i] += value * (t_k * fp(i) * below[i] + t_k.conj() * fm_neg(i) * above[i]);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = grid.dxi() / (2.0 * PI);
    let mut out = vec![ZERO; n];
    for c in contributions {
        for (o, z) in out.iter_mut().zip(c) {
            *o += z * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_at_negative_arguments() {
        assert!((zeta_negative(1.0) + 1.0 / 12.0).abs() < 1e-12);
        assert!((zeta_negative(3.0) - 1.0 / 120.0).abs() < 1e-12);
        assert!(zeta_negative(2.0).abs() < 1e-12);
        assert!((zeta_negative(1e-9) + 0.5).abs() < 1e-8);
        // ζ(-1/2) = -0.2078862250...
        assert!((zeta_negative(0.5) + 0.207_886_225_0).abs() < 1e-9);
    }

    #[test]
    fn homogeneous_norm_of_gaussian_is_exact() {
        // ‖|ξ|^s e^{-ξ²/2}‖² = Γ(s + 1/2) for f = e^{-x²/2}
        let grid = crate::grid::make_grid(40.0, 1024).unwrap();
        let f = grid.sample(|x| C64::new((-x * x / 2.0).exp(), 0.0));
        for s in [0.1, 0.3, 0.6, 1.0] {
            let exact = statrs::function::gamma::gamma(s + 0.5).sqrt();
            let got = Calculus::Free(&grid).homogeneous_norm(s, &f).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-8, "s = {s}: {got} vs {exact}");
        }
    }
    use crate::grid::make_grid;
    use crate::potential::{sample_potential, Descriptor};
    use crate::spectral::littlewood_paley::LpWindow;

    fn rel(grid: &SpatialGrid, a: &[C64], b: &[C64]) -> f64 {
        let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        grid.l2_norm(&d) / grid.l2_norm(b)
    }

    #[test]
    fn identity_multiplier() {
        let grid = make_grid(40.0, 1024).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp(), x * (-x * x).exp()));
        let out = Calculus::Free(&grid).apply_multiplier(&f, |_| C64::new(1.0, 0.0)).unwrap();
        assert!(rel(&grid, &out, &f) < 1e-14);
    }

    #[test]
    fn free_heat_semigroup_widens_gaussian() {
        // e^{tΔ} e^{-x²/2} = (1+2t)^{-1/2} e^{-x²/(2(1+2t))}
        let grid = make_grid(40.0, 2048).unwrap();
        let f = grid.sample(|x| C64::new((-x * x / 2.0).exp(), 0.0));
        let out = Calculus::Free(&grid).apply_multiplier(&f, |l| C64::new((-l).exp(), 0.0)).unwrap();
        for i in 0..grid.len() {
            let x = grid.x(i);
            let exact = (-x * x / 6.0).exp() / 3f64.sqrt();
            assert!((out[i] - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn second_power_is_minus_laplacian() {
        let grid = make_grid(40.0, 2048).unwrap();
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.0));
        let out = Calculus::Free(&grid).fractional_power(2.0, &f).unwrap();
        for i in 0..grid.len() {
            let x = grid.x(i);
            let exact = (2.0 - 4.0 * x * x) * (-x * x).exp();
            assert!((out[i] - exact).norm() < 1e-8);
        }
    }

    #[test]
    fn unresolved_multipliers_are_rejected() {
        let grid = make_grid(40.0, 1024).unwrap();
        let calc = Calculus::Free(&grid);
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.0));
        assert!(matches!(calc.apply_multiplier(&f, |_| C64::new(f64::NAN, 0.0)), Err(Error::Unresolved(_))));
        let step = |l: f64| C64::new(if l.sqrt() < 1.0 { 1.0 } else { 0.0 }, 0.0);
        assert!(matches!(calc.apply_multiplier(&f, step), Err(Error::Unresolved(_))));
        let phase = |l: f64| C64::from_polar(1.0, -37.0 * l);
        assert!(calc.apply_multiplier(&f, phase).is_ok());
    }

    #[test]
    fn barrier_calculus() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = sample_potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 }, &grid).unwrap();
        let basis = DistortedBasis::new(&v).unwrap();
        let calc = Calculus::Potential(&basis);
        let f = grid.sample(|x| C64::new((-(x - 0.5).powi(2)).exp(), 0.2 * x * (-x * x / 2.0).exp()));

        // homomorphism
        let g1 = |l: f64| C64::new(1.0 / (1.0 + l), 0.0);
        let g2 = |l: f64| C64::from_polar(1.0, -0.3 * l);
        let both = calc.apply_multiplier(&f, |l| g1(l) * g2(l)).unwrap();
        let composed = calc.apply_multiplier(&calc.apply_multiplier(&f, g2).unwrap(), g1).unwrap();
        assert!(rel(&grid, &composed, &both) < 1e-6);

        // ‖(-Δ_V)^{1/2} f‖² = ⟨(-Δ + V) f, f⟩
        let half = calc.homogeneous_norm(1.0, &f).unwrap();
        let d2 = grid.second_derivative(&f);
        let hf: Vec<C64> = (0..grid.len()).map(|i| -d2[i] + f[i] * v.samples[i]).collect();
        let form = grid.inner(&hf, &f).re;
        assert!((half * half - form).abs() < 1e-6 * form);

        // kernel quadrature against the distorted transform
        let j = 0;
        let piece = |l: f64| C64::new(LpWindow::piece(j, l.sqrt()), 0.0);
        let spectral = calc.apply_multiplier(&f, piece).unwrap();
        let kernel = kernel_multiplier(&v, &f, piece).unwrap();
        assert!(rel(&grid, &kernel, &spectral) < 1e-5, "{}", rel(&grid, &kernel, &spectral));
    }
}
