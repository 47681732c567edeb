//! Gauge transforms, the free propagator in factored form, the vector field
//! `J = 2ti∂_x + x`, the invariant operators `|J(t)|^s`, `|J_V(t)|^s` and the
//! commutator defect `A(s) = s(-Δ_V)^{s/2} + [x∂_x, (-Δ_V)^{s/2}]`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::SpatialGrid;
use crate::potential::Potential;
use crate::spectral::kato::{kato_a_operator, KatoQuadrature};
use crate::spectral::multiplier::Calculus;

const I: C64 = C64::new(0.0, 1.0);

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be positive, got {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `M(±t) f = e^{±ix²/4t} f`.
pub fn gauge(grid: &SpatialGrid, t: f64, sign: Sign, f: &[C64]) -> Result<Vec<C64>> {
    check_time(t)?;
    grid.check(f.len())?;
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    Ok(f.iter()
        .enumerate()
        .map(|(i, z)| {
            let x = grid.x(i);
            z * C64::from_polar(1.0, s * x * x / (4.0 * t))
        })
        .collect())
}

/// `e^{itΔ} f` as the Fourier multiplier `e^{-itξ²}`.
pub fn free_propagator(grid: &SpatialGrid, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    grid.check(f.len())?;
    Ok(grid.apply_symbol(f, |xi| C64::from_polar(1.0, -t * xi * xi)))
}

/// `e^{itΔ} f = M(t) D(t) F^{-1} M(t) f` with `D(t)φ(x) = (2it)^{-1/2} φ(x/2t)`.
/// The inverse transform is evaluated at the off-lattice points `x/2t` by
/// direct summation.
pub fn free_propagator_factored(grid: &SpatialGrid, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    let mf = gauge(grid, t, Sign::Plus, f)?;
    let n = grid.len();
    let dx = grid.dx();
    let nodes = grid.nodes();
    let prefactor = (C64::new(0.0, 2.0 * t)).sqrt().inv() * dx / (2.0 * PI).sqrt();
    let out: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = nodes[i] / (2.0 * t);
            let sum: C64 = nodes.iter().zip(&mf).map(|(y, g)| g * C64::from_polar(1.0, -xi * y)).sum();
            let x = nodes[i];
            C64::from_polar(1.0, x * x / (4.0 * t)) * sum * prefactor
        })
        .collect();
    Ok(out)
}

/// `J(t) f = 2ti f' + x f`.
pub fn vector_field_j(grid: &SpatialGrid, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    check_time(t)?;
    grid.check(f.len())?;
    let df = grid.derivative(f);
    Ok((0..grid.len()).map(|i| 2.0 * t * I * df[i] + grid.x(i) * f[i]).collect())
}

/// Both sides of `e^{itΔ} g(x) e^{-itΔ} = M(t) g(2ti∂_x) M(-t)` applied to `f`.
/// With the transform kernel `e^{+iξx}`, `i∂_x` acts as the multiplier `ξ`.
pub fn conjugation_identity<G: Fn(f64) -> C64>(grid: &SpatialGrid, t: f64, g: G, f: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    check_time(t)?;
    let back = free_propagator(grid, -t, f)?;
    let weighted: Vec<C64> = back.iter().enumerate().map(|(i, z)| z * g(grid.x(i))).collect();
    let lhs = free_propagator(grid, t, &weighted)?;
    let gauged = gauge(grid, t, Sign::Minus, f)?;
    let mid = grid.apply_symbol(&gauged, |xi| g(2.0 * t * xi));
    let rhs = gauge(grid, t, Sign::Plus, &mid)?;
    Ok((lhs, rhs))
}

/// `M(t) (-t²Δ)^{s/2} M(-t) f` or the same with `Δ_V`.
pub fn weighted_j_power(calc: &Calculus, s: f64, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    let grid = calc.grid();
    let g = gauge(grid, t, Sign::Minus, f)?;
    let mut p = calc.fractional_power(s, &g)?;
    let scale = t.powf(s);
    p.iter_mut().for_each(|z| *z *= scale);
    gauge(grid, t, Sign::Plus, &p)
}

/// `‖|J(t)|^s f‖₂` (or `|J_V(t)|^s`) read off the spectral side.
pub fn weighted_j_norm(calc: &Calculus, s: f64, t: f64, f: &[C64]) -> Result<f64> {
    let g = gauge(calc.grid(), t, Sign::Minus, f)?;
    Ok(t.powf(s) * calc.homogeneous_norm(s, &g)?)
}

/// Which realization of `A(s)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ARoute {
    /// `c(s) ∫ τ^{s/2} R(τ) V₁ R(τ) dτ`.
    Kato,
    /// `s P f + x (P f)' - P(x f')` with `P = (-Δ_V)^{s/2}`.
    Commutator,
}

/// `A(s) f` for `0 < s < 2`.
///
/// For `V ≡ 0` the commutator route is taken on the Fourier side, where
/// `[x∂_x, m(D)]` has symbol `-ξ m'(ξ)`; on the grid the position-space
/// product with `x` would see the periodic image of the slowly decaying
/// tails of `|D|^s f`.
pub fn a_apply(v: &Potential, calc: &Calculus, s: f64, f: &[C64], route: ARoute, quadrature: &KatoQuadrature) -> Result<Vec<C64>> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::InvalidParameter(format!("A(s) needs 0 < s < 2, got {s}")));
    }
    let grid = calc.grid();
    grid.check(f.len())?;
    match route {
        ARoute::Kato => kato_a_operator(v, s, f, quadrature),
        ARoute::Commutator if v.is_zero() => Ok(grid.apply_symbol(f, |xi| {
            let a = xi.abs();
            let power = a.powf(s);
            let dilation = if a == 0.0 { 0.0 } else { xi * s * a.powf(s - 1.0) * xi.signum() };
            C64::new(s * power - dilation, 0.0)
        })),
        ARoute::Commutator => {
            let pf = calc.fractional_power(s, f)?;
            let dpf = grid.derivative(&pf);
            let df = grid.derivative(f);
            let xdf: Vec<C64> = (0..grid.len()).map(|i| grid.x(i) * df[i]).collect();
            let pxdf = calc.fractional_power(s, &xdf)?;
            Ok((0..grid.len()).map(|i| s * pf[i] + grid.x(i) * dpf[i] - pxdf[i]).collect())
        }
    }
}

/// `‖A(s) f‖₁ / ‖f‖_∞`.
pub fn a_bound_ratio(grid: &SpatialGrid, af: &[C64], f: &[C64]) -> f64 {
    let l1 = grid.integrate(&af.iter().map(|z| z.norm()).collect::<Vec<_>>());
    l1 / f.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Nonlinearity `λ|u|^{p-1}u` entering the flow `(i∂_t + Δ_V)u + λ|u|^{p-1}u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonlinearity {
    pub lambda: f64,
    pub p: f64,
}

impl Nonlinearity {
    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        u.iter()
            .map(|z| {
                let m = z.norm();
                if m == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    z * (self.lambda * m.powf(self.p - 1.0))
                }
            })
            .collect()
    }
}

/// Residual of `(i∂_t + Δ_V)|J_V|^s u - i t^{s-1} M(t) A(s) M(-t) u + λ|J_V|^s(|u|^{p-1}u) = 0`
/// at one interior sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub residual: f64,
    /// `residual / ‖|J_V|^s u‖₂`.
    pub relative: f64,
}

/// Evaluates the commutator relation along a trajectory sampled at uniform
/// steps. Writing `g = M(-t)u` and `h = t^s (-Δ_V)^{s/2} g`, so that
/// `|J_V|^s u = M(t)h`, the relation reads
///
/// ```text
/// i∂_t h + Δ_V h + (i/t) x h' + (i/2t) h - i t^{s-1} A(s) g + λ t^s (-Δ_V)^{s/2} M(-t)F = 0
/// ```
///
/// and `∂_t h` is taken with the fourth-order five-point stencil.
pub fn commutator_residual(
    v: &Potential,
    calc: &Calculus,
    s: f64,
    trajectory: &[WaveField],
    nonlinearity: Option<Nonlinearity>,
    route: ARoute,
    quadrature: &KatoQuadrature,
) -> Result<Vec<ResidualSample>> {
    if trajectory.len() < 5 {
        return Err(Error::Trajectory(format!("need at least 5 samples, got {}", trajectory.len())));
    }
    let dt = trajectory[1].t - trajectory[0].t;
    if !(dt > 0.0) || trajectory.windows(2).any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::Trajectory("samples are not uniformly spaced in time".into()));
    }
    let grid = calc.grid();
    let n = grid.len();
    let gs: Vec<Vec<C64>> = trajectory
        .iter()
        .map(|u| gauge(grid, u.t, Sign::Minus, &u.values))
        .collect::<Result<_>>()?;
    let hs: Vec<Vec<C64>> = trajectory
        .par_iter()
        .zip(&gs)
        .map(|(u, g)| {
            let mut h = calc.fractional_power(s, g)?;
            let scale = u.t.powf(s);
            h.iter_mut().for_each(|z| *z *= scale);
            Ok(h)
        })
        .collect::<Result<_>>()?;
    (2..trajectory.len() - 2)
        .into_par_iter()
        .map(|m| {
            let t = trajectory[m].t;
            let h = &hs[m];
            let g = &gs[m];
            let dh: Vec<C64> = (0..n)
                .map(|i| (hs[m - 2][i] - 8.0 * hs[m - 1][i] + 8.0 * hs[m + 1][i] - hs[m + 2][i]) / (12.0 * dt))
                .collect();
            // Δ_V h = -t^s (-Δ_V)^{(s+2)/2} g
            let lap = calc.fractional_power(s + 2.0, g)?;
            let ts = t.powf(s);
            let xhx = if v.is_zero() { dilation_of_power(grid, s, ts, h, g) } else { dilation(grid, h) };
            let a = a_apply(v, calc, s, g, route, quadrature)?;
            let mut r: Vec<C64> = (0..n)
                .map(|i| I * dh[i] - ts * lap[i] + (I / t) * xhx[i] + (I / (2.0 * t)) * h[i] - I * t.powf(s - 1.0) * a[i])
                .collect();
            if let Some(nl) = nonlinearity {
                let f = nl.apply(&trajectory[m].values);
                let gf = gauge(grid, t, Sign::Minus, &f)?;
                let pf = calc.fractional_power(s, &gf)?;
                r.iter_mut().zip(&pf).for_each(|(z, w)| *z += ts * w);
            }
            let residual = grid.l2_norm(&r);
            Ok(ResidualSample { t, residual, relative: residual / grid.l2_norm(h) })
        })
        .collect()
}

fn dilation(grid: &SpatialGrid, h: &[C64]) -> Vec<C64> {
    let hx = grid.derivative(h);
    (0..grid.len()).map(|i| grid.x(i) * hx[i]).collect()
}

/// `x ∂_x h` for `h = c |D|^s g`, taken on the Fourier side as
/// `-h - F^{-1}[ξ ∂_ξ ĥ]` with `∂_ξ ĝ = F[i x g]`. The algebraic tails of `h`
/// never meet the periodic seam this way.
fn dilation_of_power(grid: &SpatialGrid, s: f64, c: f64, h: &[C64], g: &[C64]) -> Vec<C64> {
    let gh = grid.forward(g);
    let xg: Vec<C64> = (0..grid.len()).map(|i| grid.x(i) * g[i]).collect();
    let xgh = grid.forward(&xg);
    let spec: Vec<C64> = grid
        .frequencies()
        .into_iter()
        .enumerate()
        .map(|(k, xi)| {
            let power = xi.abs().powf(s);
            c * power * (s * gh[k] + xi * I * xgh[k])
        })
        .collect();
    let w = grid.inverse(&spec);
    h.iter().zip(w).map(|(a, b)| -a - b).collect()
}

/// `‖|J(t)|^s f‖` against `‖|J_V(t)|^s f‖`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvariantNormRecord {
    pub s: f64,
    pub t: f64,
    pub free: f64,
    pub potential: f64,
    pub ratio: f64,
    /// For `1/2 < s < 1`: `‖|J_V|^s f‖ / (t^{s+ε-1/2}(‖|J|^{1/2-ε} f‖ + ‖|J|^s f‖))`.
    pub forward_constant: Option<f64>,
    /// The same with `J` and `J_V` exchanged.
    pub backward_constant: Option<f64>,
}

pub fn j_vs_jv_report(free: &Calculus, potential: &Calculus, s: f64, t: f64, eps: f64, f: &[C64]) -> Result<InvariantNormRecord> {
    let a = weighted_j_norm(free, s, t, f)?;
    let b = weighted_j_norm(potential, s, t, f)?;
    let (forward_constant, backward_constant) = if s > 0.5 && s < 1.0 {
        let low = 0.5 - eps;
        let growth = t.powf(s + eps - 0.5);
        let fa = weighted_j_norm(free, low, t, f)?;
        let fb = weighted_j_norm(potential, low, t, f)?;
        (Some(b / (growth * (fa + a))), Some(a / (growth * (fb + b))))
    } else {
        (None, None)
    };
    Ok(InvariantNormRecord { s, t, free: a, potential: b, ratio: b / a, forward_constant, backward_constant })
}
