//! Resolvent-integral realizations of `(-Δ_V)^{s/2}` and of `A(s)`.
//!
//! Both integrals over `τ ∈ (0, ∞)` are discretized by the trapezoidal rule
//! in `log τ` on `[τ_min, τ_max]`. The pieces below `τ_min` and above `τ_max`
//! are added in closed form from the small- and large-`τ` expansions of the
//! resolvent.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::spectral::resolvent::Resolvent;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Geometric quadrature in `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct KatoQuadrature {
    pub tau_min: f64,
    pub tau_max: f64,
    pub nodes: usize,
}

impl Default for KatoQuadrature {
    fn default() -> Self {
        Self { tau_min: 1e-4, tau_max: 1e4, nodes: 481 }
    }
}

impl KatoQuadrature {
    fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0 && self.tau_max > self.tau_min && self.tau_max.is_finite() && self.nodes >= 3) {
            return Err(Error::InvalidParameter(format!("bad Kato quadrature {self:?}")));
        }
        Ok(())
    }

    /// Nodes `τ_i` and weights for `∫ h(τ) dτ`.
    pub fn rule(&self) -> Vec<(f64, f64)> {
        let (a, b) = (self.tau_min.ln(), self.tau_max.ln());
        let h = (b - a) / (self.nodes - 1) as f64;
        (0..self.nodes)
            .map(|i| {
                let tau = (a + i as f64 * h).exp();
                let end = i == 0 || i + 1 == self.nodes;
                (tau, if end { 0.5 * h * tau } else { h * tau })
            })
            .collect()
    }

    /// `[∫₀^∞ τ^{s/2-1}(τ+1)^{-1} dτ]^{-1}` with the same rule and tails.
    pub fn constant(&self, s: f64) -> Result<f64> {
        check_order(s)?;
        self.validate()?;
        let half = s / 2.0;
        let body: f64 = self.rule().iter().map(|(t, w)| w * t.powf(half - 1.0) / (t + 1.0)).sum();
        let lower = (2.0 / s) * self.tau_min.powf(half) - self.tau_min.powf(half + 1.0) / (half + 1.0);
        let upper = self.tau_max.powf(half - 1.0) / (1.0 - half) - self.tau_max.powf(half - 2.0) / (2.0 - half);
        Ok(1.0 / (body + lower + upper))
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("resolvent integral needs 0 < s < 2, got {s}")))
    }
}

/// `sin(πs/2)/π`, the closed value of the normalization.
pub fn kato_constant_exact(s: f64) -> f64 {
    (PI * s / 2.0).sin() / PI
}

/// `(-∂² + V) f` with the spectral second derivative.
fn schrodinger(v: &Potential, f: &[C64]) -> Vec<C64> {
    let d2 = v.grid.second_derivative(f);
    d2.iter().zip(f).zip(&v.samples).map(|((d, z), w)| -d + z * w).collect()
}

fn axpy(out: &mut [C64], a: f64, x: &[C64]) {
    out.iter_mut().zip(x).for_each(|(o, z)| *o += z * a);
}

/// `c(s)(-Δ_V) ∫₀^∞ τ^{s/2-1} (τ - Δ_V)^{-1} f dτ`.
pub fn kato_fractional(v: &Potential, s: f64, f: &[C64], q: &KatoQuadrature) -> Result<Vec<C64>> {
    check_order(s)?;
    v.grid.check(f.len())?;
    let c = q.constant(s)?;
    let half = s / 2.0;
    let n = f.len();
    // (-Δ_V)(τ - Δ_V)^{-1} = 1 - τ(τ - Δ_V)^{-1}
    let terms = q
        .rule()
        .into_par_iter()
        .map(|(tau, w)| -> Result<Vec<C64>> {
            let u = Resolvent::new(v, tau)?.solve(f)?;
            let weight = w * tau.powf(half - 1.0);
            Ok((0..n).map(|i| (f[i] - u[i] * tau) * weight).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![ZERO; n];
    for t in terms {
        axpy(&mut out, 1.0, &t);
    }
    let at_min = Resolvent::new(v, q.tau_min)?.solve(f)?;
    axpy(&mut out, (2.0 / s) * q.tau_min.powf(half), f);
    axpy(&mut out, -q.tau_min.powf(half + 1.0) / (half + 1.0), &at_min);
    // (-Δ_V)(τ - Δ_V)^{-1} ≈ H/τ - H²/τ² for large τ
    let hf = schrodinger(v, f);
    let hhf = schrodinger(v, &hf);
    axpy(&mut out, q.tau_max.powf(half - 1.0) / (1.0 - half), &hf);
    axpy(&mut out, -q.tau_max.powf(half - 2.0) / (2.0 - half), &hhf);
    out.iter_mut().for_each(|z| *z *= c);
    Ok(out)
}

/// `A(s) f = c(s) ∫₀^∞ τ^{s/2} (τ - Δ_V)^{-1} V₁ (τ - Δ_V)^{-1} f dτ`.
pub fn kato_a_operator(v: &Potential, s: f64, f: &[C64], q: &KatoQuadrature) -> Result<Vec<C64>> {
    check_order(s)?;
    v.grid.check(f.len())?;
    let c = q.constant(s)?;
    let half = s / 2.0;
    let n = f.len();
    let v1 = v.virial_samples();
    let sandwich = |tau: f64| -> Result<Vec<C64>> {
        let r = Resolvent::new(v, tau)?;
        let mut inner = r.solve(f)?;
        inner.iter_mut().zip(&v1).for_each(|(z, w)| *z *= w);
        r.solve(&inner)
    };
    let terms = q
        .rule()
        .into_par_iter()
        .map(|(tau, w)| -> Result<Vec<C64>> {
            let mut u = sandwich(tau)?;
            let weight = w * tau.powf(half);
            u.iter_mut().for_each(|z| *z *= weight);
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![ZERO; n];
    for t in terms {
        axpy(&mut out, 1.0, &t);
    }
    axpy(&mut out, q.tau_min.powf(half + 1.0) / (half + 1.0), &sandwich(q.tau_min)?);
    // R V₁ R ≈ V₁/τ² - (H V₁ + V₁ H)/τ³ for large τ
    let times_v1 = |g: &[C64]| -> Vec<C64> { g.iter().zip(&v1).map(|(z, w)| z * w).collect() };
    let v1f = times_v1(f);
    let hv1f = schrodinger(v, &v1f);
    let v1hf = times_v1(&schrodinger(v, f));
    axpy(&mut out, q.tau_max.powf(half - 1.0) / (1.0 - half), &v1f);
    axpy(&mut out, -q.tau_max.powf(half - 2.0) / (2.0 - half), &hv1f);
    axpy(&mut out, -q.tau_max.powf(half - 2.0) / (2.0 - half), &v1hf);
    out.iter_mut().for_each(|z| *z *= c);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectral::multiplier::Calculus;

    #[test]
    fn normalization_matches_closed_form() {
        let q = KatoQuadrature::default();
        for s in [0.1, 0.3, 0.5, 1.0, 1.5, 1.9] {
            let c = q.constant(s).unwrap();
            let exact = kato_constant_exact(s);
            assert!((c - exact).abs() < 1e-6 * exact, "s = {s}: {c} vs {exact}");
        }
    }

    #[test]
    fn rejects_orders_outside_range() {
        let q = KatoQuadrature::default();
        assert!(q.constant(0.0).is_err());
        assert!(q.constant(2.0).is_err());
    }

    #[test]
    fn free_half_derivative_matches_multiplier() {
        let grid = make_grid(40.0, 2048).unwrap();
        let v = Potential::zero(&grid);
        let f = grid.sample(|x| C64::new(x * (-x * x).exp(), 0.0));
        let kato = kato_fractional(&v, 1.0, &f, &KatoQuadrature::default()).unwrap();
        let multiplier = Calculus::Free(&grid).fractional_power(1.0, &f).unwrap();
        let diff: Vec<C64> = kato.iter().zip(&multiplier).map(|(a, b)| a - b).collect();
        assert!(grid.l2_norm(&diff) < 1e-3 * grid.l2_norm(&multiplier));
    }

    #[test]
    fn free_a_operator_vanishes() {
        let grid = make_grid(40.0, 1024).unwrap();
        let v = Potential::zero(&grid);
        let f = grid.sample(|x| C64::new((-x * x).exp(), 0.0));
        let a = kato_a_operator(&v, 0.5, &f, &KatoQuadrature::default()).unwrap();
        assert!(a.iter().all(|z| *z == ZERO));
    }
}
