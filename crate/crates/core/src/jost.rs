//! Jost solutions, Wronskian and the scattering coefficients `T`, `R_±`.
//!
//! `f_±(x, k) = e^{±ikx} m_±(x, k)` solve `-f'' + V f = k² f` with
//! `m_± → 1` as `x → ±∞`. Inside the support window of `V` the equation is
//! integrated in first-order form `Y' = A(x) Y`, `A = [[0, 1], [V - k², 0]]`,
//! with the fourth-order Magnus scheme on Gauss nodes; each step applies the
//! exact exponential of a traceless 2×2 matrix, so the scheme is exact for
//! piecewise-constant `V` and stays uniform in `k`. Outside the window the
//! free solution is continued in closed form.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Smallest momentum node used for extrapolation to `τ = 0`.
pub const DELTA_TAU: f64 = 1e-3;
/// Classification tolerance on the extrapolated `T(0)`.
pub const DELTA_GEN: f64 = 1e-3;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostOptions {
    /// Largest Magnus step.
    pub max_step: f64,
    /// Bound on the step-doubling defect `max |m_h - m_{h/2}|`.
    pub tolerance: f64,
    /// How many times the step may be halved before giving up.
    pub refinements: usize,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self { max_step: 0.01, tolerance: 1e-9, refinements: 3 }
    }
}

/// Jost factors on every grid node at one momentum.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub momentum: C64,
    pub m_plus: Vec<C64>,
    pub dm_plus: Vec<C64>,
    pub m_minus: Vec<C64>,
    pub dm_minus: Vec<C64>,
    /// Step-doubling estimate of the integration error in `m_±`.
    pub defect: f64,
    /// Central-difference `∂_τ m_±`, when requested.
    pub dtau_plus: Option<Vec<C64>>,
    pub dtau_minus: Option<Vec<C64>>,
}

impl JostSolution {
    /// `w = f_+' f_- - f_+ f_-'` evaluated at node `i`.
    pub fn wronskian_at(&self, i: usize) -> C64 {
        let k = self.momentum;
        2.0 * I * k * self.m_plus[i] * self.m_minus[i] + self.dm_plus[i] * self.m_minus[i]
            - self.m_plus[i] * self.dm_minus[i]
    }

    pub fn wronskian(&self) -> C64 {
        self.wronskian_at(self.m_plus.len() / 2)
    }

    pub fn f_plus(&self, x: f64, i: usize) -> C64 {
        (I * self.momentum * x).exp() * self.m_plus[i]
    }

    pub fn f_minus(&self, x: f64, i: usize) -> C64 {
        (-I * self.momentum * x).exp() * self.m_minus[i]
    }
}

// (1 - e^{-z}) / z, finite at z = 0
fn phi1(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        C64::new(1.0, 0.0) - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
    } else {
        (C64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

// cosh(mu) and sinh(mu)/mu as functions of mu^2
fn cosh_sinhc(mu2: C64) -> (C64, C64) {
    if mu2.norm() < 1e-4 {
        let c = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0;
        let s = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
        (c, s)
    } else {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
const COMMUTATOR: f64 = 0.144_337_567_297_406_43; // sqrt(3)/12

/// Advances `(f, f')` across `[x, x + h]` for `f'' = (V - k²) f`.
fn magnus_step<V: Fn(f64) -> f64>(v: &V, k2: C64, x: f64, h: f64, y: (C64, C64)) -> (C64, C64) {
    let q1 = v(x + h * (0.5 - GAUSS_OFFSET)) - k2;
    let q2 = v(x + h * (0.5 + GAUSS_OFFSET)) - k2;
    let alpha = COMMUTATOR * h * h * (q1 - q2);
    let beta = h;
    let gamma = 0.5 * h * (q1 + q2);
    let (c, s) = cosh_sinhc(alpha * alpha + beta * gamma);
    let (f, df) = y;
    (c * f + s * (alpha * f + beta * df), c * df + s * (gamma * f - alpha * df))
}

/// Integrates from `points[0]` through `points[1..]`, recording `(f, f')` at each.
fn sweep<V: Fn(f64) -> f64>(v: &V, k2: C64, points: &[f64], max_step: f64, start: (C64, C64)) -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(points.len());
    let mut y = start;
    out.push(y);
    for pair in points.windows(2) {
        let span = pair[1] - pair[0];
        let n = (span.abs() / max_step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for j in 0..n {
            y = magnus_step(v, k2, pair[0] + j as f64 * h, h, y);
        }
        out.push(y);
    }
    out
}

struct Window {
    a: f64,
    b: f64,
    lo: usize,
    hi: usize,
    /// `a`, interior nodes and jumps, `b`, increasing.
    points: Vec<f64>,
    /// Node index for each entry of `points`, if it is a grid node.
    node_of: Vec<Option<usize>>,
}

fn window(v: &Potential) -> Option<Window> {
    let (a, b) = v.window()?;
    let grid = &v.grid;
    let n = grid.len();
    let lo = (0..n).find(|&i| grid.x(i) >= a)?;
    let hi = (0..n).rev().find(|&i| grid.x(i) <= b)?;
    let mut tagged: Vec<(f64, Option<usize>)> = vec![(a, None), (b, None)];
    tagged.extend((lo..=hi).map(|i| (grid.x(i), Some(i))));
    tagged.extend(v.descriptor.jumps().into_iter().filter(|&x| x > a && x < b).map(|x| (x, None)));
    tagged.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.is_some().cmp(&p.1.is_some())));
    tagged.dedup_by(|later, earlier| later.0 == earlier.0);
    Some(Window {
        a,
        b,
        lo,
        hi,
        points: tagged.iter().map(|p| p.0).collect(),
        node_of: tagged.iter().map(|p| p.1).collect(),
    })
}

struct Raw {
    m_plus: Vec<C64>,
    dm_plus: Vec<C64>,
    m_minus: Vec<C64>,
    dm_minus: Vec<C64>,
}

fn integrate(v: &Potential, win: &Window, k: C64, max_step: f64) -> Raw {
    let grid = &v.grid;
    let n = grid.len();
    let k2 = k * k;
    let pot = |x: f64| v.descriptor.value(x);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut raw = Raw {
        m_plus: vec![one; n],
        dm_plus: vec![zero; n],
        m_minus: vec![one; n],
        dm_minus: vec![zero; n],
    };

    // f_+ normalised to 1 at b, integrated leftwards
    let rev: Vec<f64> = win.points.iter().rev().copied().collect();
    let plus = sweep(&pot, k2, &rev, max_step, (one, I * k));
    let count = win.points.len();
    let mut edge_plus = (one, zero);
    for (j, &(f, df)) in plus.iter().enumerate() {
        let x = rev[j];
        let phase = (-I * k * (x - win.b)).exp();
        let (m, dm) = (f * phase, (df - I * k * f) * phase);
        if let Some(i) = win.node_of[count - 1 - j] {
            raw.m_plus[i] = m;
            raw.dm_plus[i] = dm;
        }
        if j == count - 1 {
            edge_plus = (m, dm);
        }
    }
    for i in 0..win.lo {
        let d = grid.x(i) - win.a;
        raw.m_plus[i] = edge_plus.0 + edge_plus.1 * d * phi1(2.0 * I * k * d);
        raw.dm_plus[i] = edge_plus.1 * (-2.0 * I * k * d).exp();
    }

    // f_- normalised to 1 at a, integrated rightwards
    let minus = sweep(&pot, k2, &win.points, max_step, (one, -I * k));
    let mut edge_minus = (one, zero);
    for (j, &(f, df)) in minus.iter().enumerate() {
        let x = win.points[j];
        let phase = (I * k * (x - win.a)).exp();
        let (m, dm) = (f * phase, (df + I * k * f) * phase);
        if let Some(i) = win.node_of[j] {
            raw.m_minus[i] = m;
            raw.dm_minus[i] = dm;
        }
        if j == count - 1 {
            edge_minus = (m, dm);
        }
    }
    for i in win.hi + 1..n {
        let d = grid.x(i) - win.b;
        raw.m_minus[i] = edge_minus.0 + edge_minus.1 * d * phi1(-2.0 * I * k * d);
        raw.dm_minus[i] = edge_minus.1 * (2.0 * I * k * d).exp();
    }
    raw
}

fn max_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

/// Jost factors at complex momentum `k` (real, or `Im k > 0`).
pub fn solve_jost_at(v: &Potential, k: C64, options: &JostOptions) -> Result<JostSolution> {
    if !(k.re.is_finite() && k.im.is_finite()) || k.im < 0.0 {
        return Err(Error::InvalidParameter(format!("momentum must be finite with Im k >= 0, got {k}")));
    }
    let n = v.grid.len();
    let Some(win) = window(v) else {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        return Ok(JostSolution {
            momentum: k,
            m_plus: vec![one; n],
            dm_plus: vec![zero; n],
            m_minus: vec![one; n],
            dm_minus: vec![zero; n],
            defect: 0.0,
            dtau_plus: None,
            dtau_minus: None,
        });
    };
    let mut step = options.max_step;
    let mut coarse = integrate(v, &win, k, step);
    let mut defect = f64::INFINITY;
    for _ in 0..=options.refinements {
        step /= 2.0;
        let fine = integrate(v, &win, k, step);
        let range = win.lo.min(n - 1)..(win.hi + 1).min(n);
        let scale = 1.0 + k.norm();
        defect = max_gap(&coarse.m_plus[range.clone()], &fine.m_plus[range.clone()])
            .max(max_gap(&coarse.m_minus[range.clone()], &fine.m_minus[range.clone()]))
            .max(max_gap(&coarse.dm_plus[range.clone()], &fine.dm_plus[range.clone()]) / scale)
            .max(max_gap(&coarse.dm_minus[range.clone()], &fine.dm_minus[range]) / scale);
        coarse = fine;
        if defect <= options.tolerance {
            break;
        }
    }
    if defect > options.tolerance {
        return Err(Error::JostDefect { defect, tolerance: options.tolerance, momentum: k.to_string() });
    }
    Ok(JostSolution {
        momentum: k,
        m_plus: coarse.m_plus,
        dm_plus: coarse.dm_plus,
        m_minus: coarse.m_minus,
        dm_minus: coarse.dm_minus,
        defect,
        dtau_plus: None,
        dtau_minus: None,
    })
}

/// Jost factors at real momentum `τ` with default options.
pub fn solve_jost(v: &Potential, tau: f64) -> Result<JostSolution> {
    solve_jost_at(v, C64::new(tau, 0.0), &JostOptions::default())
}

/// As [`solve_jost`], also filling `∂_τ m_±` by a central difference.
pub fn solve_jost_with_derivative(v: &Potential, tau: f64) -> Result<JostSolution> {
    let options = JostOptions::default();
    let mut sol = solve_jost(v, tau)?;
    let delta = 1e-4 * tau.abs().max(1.0);
    let up = solve_jost_at(v, C64::new(tau + delta, 0.0), &options)?;
    let down = solve_jost_at(v, C64::new(tau - delta, 0.0), &options)?;
    let diff = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(p, q)| (p - q) / (2.0 * delta)).collect();
    sol.dtau_plus = Some(diff(&up.m_plus, &down.m_plus));
    sol.dtau_minus = Some(diff(&up.m_minus, &down.m_minus));
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Genericity {
    Generic,
    Transparent,
    ExceptionalOther,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPoint {
    pub tau: f64,
    pub w: C64,
    pub t: C64,
    pub r_plus: C64,
    pub r_minus: C64,
    /// `max(||T|² + |R_+|² - 1|, ||T|² + |R_-|² - 1|)`
    pub unitarity: f64,
}

#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub points: Vec<ScatteringPoint>,
}

impl ScatteringData {
    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    /// Values at `-τ`: for real `V`, `T(-τ) = conj T(τ)` and likewise for `R_±`.
    pub fn reflected(&self) -> Vec<ScatteringPoint> {
        self.points
            .iter()
            .rev()
            .map(|p| ScatteringPoint {
                tau: -p.tau,
                w: -p.w.conj(),
                t: p.t.conj(),
                r_plus: p.r_plus.conj(),
                r_minus: p.r_minus.conj(),
                unitarity: p.unitarity,
            })
            .collect()
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.points.iter().map(|p| p.unitarity).fold(0.0, f64::max)
    }

    pub fn to_table(&self) -> crate::table::Table {
        let mut table = crate::table::Table::new([
            "tau", "w_re", "w_im", "t_re", "t_im", "r_plus_re", "r_plus_im", "r_minus_re", "r_minus_im",
        ]);
        for p in &self.points {
            table.push(vec![
                p.tau, p.w.re, p.w.im, p.t.re, p.t.im, p.r_plus.re, p.r_plus.im, p.r_minus.re, p.r_minus.im,
            ]);
        }
        table
    }
}

/// Least-squares `R` in `b = R a` over a slice of nodes.
fn fit(a: &[C64], b: &[C64]) -> C64 {
    let num: C64 = a.iter().zip(b).map(|(p, q)| p.conj() * q).sum();
    let den: f64 = a.iter().map(|p| p.norm_sqr()).sum();
    num / den
}

/// Scattering coefficients from one Jost solve at real `τ > 0`.
pub fn scattering_point(v: &Potential, sol: &JostSolution) -> Result<ScatteringPoint> {
    let tau = sol.momentum.re;
    let grid = &v.grid;
    let n = grid.len();
    let w = sol.wronskian();
    if w.norm() < 1e-300 || !w.re.is_finite() {
        return Err(Error::VanishingWronskian { tau, magnitude: w.norm() });
    }
    let t = 2.0 * I * tau / w;
    let edge = (n / 10).max(1);
    let right = n - edge..n;
    let left = 0..edge;
    // T m_- = R_+ e^{2iτx} m_+ + conj(m_+)
    let (a, b): (Vec<C64>, Vec<C64>) = right
        .map(|i| {
            let x = grid.x(i);
            ((2.0 * I * tau * x).exp() * sol.m_plus[i], t * sol.m_minus[i] - sol.m_plus[i].conj())
        })
        .unzip();
    let r_plus = fit(&a, &b);
    // T m_+ = R_- e^{-2iτx} m_- + conj(m_-)
    let (a, b): (Vec<C64>, Vec<C64>) = left
        .map(|i| {
            let x = grid.x(i);
            ((-2.0 * I * tau * x).exp() * sol.m_minus[i], t * sol.m_plus[i] - sol.m_minus[i].conj())
        })
        .unzip();
    let r_minus = fit(&a, &b);
    let tt = t.norm_sqr();
    let unitarity = (tt + r_plus.norm_sqr() - 1.0).abs().max((tt + r_minus.norm_sqr() - 1.0).abs());
    Ok(ScatteringPoint { tau, w, t, r_plus, r_minus, unitarity })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringOptions {
    pub jost: JostOptions,
    pub unitarity_tolerance: f64,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self { jost: JostOptions::default(), unitarity_tolerance: 1e-7 }
    }
}

/// Wronskian, `T = 2iτ/w` and `R_±` on `taus`, solved in parallel.
pub fn scattering_data(v: &Potential, taus: &[f64]) -> Result<ScatteringData> {
    scattering_data_with(v, taus, &ScatteringOptions::default())
}

pub fn scattering_data_with(v: &Potential, taus: &[f64], options: &ScatteringOptions) -> Result<ScatteringData> {
    if let Some(&bad) = taus.iter().find(|&&t| !(t.is_finite() && t >= DELTA_TAU * (1.0 - 1e-12))) {
        return Err(Error::InvalidParameter(format!(
            "momentum nodes must be at least {DELTA_TAU:e}, got {bad}"
        )));
    }
    let points = taus
        .par_iter()
        .map(|&tau| {
            let sol = solve_jost_at(v, C64::new(tau, 0.0), &options.jost)?;
            let p = scattering_point(v, &sol)?;
            if p.unitarity > options.unitarity_tolerance {
                return Err(Error::Unitarity { defect: p.unitarity, tolerance: options.unitarity_tolerance, tau });
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringData { points })
}

/// `δ_τ·{1,2,3,4}` followed by `count` uniform nodes on `(4δ_τ, tau_max]`.
pub fn tau_grid(tau_max: f64, count: usize) -> Vec<f64> {
    let mut taus: Vec<f64> = (1..=4).map(|j| j as f64 * DELTA_TAU).collect();
    let start = 4.0 * DELTA_TAU;
    for j in 1..=count {
        taus.push(start + (tau_max - start) * j as f64 / count as f64);
    }
    taus
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: Genericity,
    pub t0: C64,
    pub r_plus0: C64,
    /// `T(0) - 1 - R_+(0)`
    pub combination: C64,
    /// Disagreement between the cubic and quadratic extrapolants.
    pub stencil_gap: f64,
}

fn lagrange_at_zero(nodes: &[f64], values: &[C64]) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for (j, (&xj, &yj)) in nodes.iter().zip(values).enumerate() {
        let mut weight = 1.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m != j {
                weight *= xm / (xm - xj);
            }
        }
        total += yj * weight;
    }
    total
}

/// Extrapolates `T` and `R_+` to `τ = 0` from the four smallest nodes and
/// classifies the potential.
pub fn classify_potential(sd: &ScatteringData) -> Result<Classification> {
    let mut pts = sd.points.clone();
    pts.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    if pts.len() < 4 {
        return Err(Error::InvalidParameter("classification needs at least four momentum nodes".into()));
    }
    let near = &pts[..4];
    let taus: Vec<f64> = near.iter().map(|p| p.tau).collect();
    let ts: Vec<C64> = near.iter().map(|p| p.t).collect();
    let rs: Vec<C64> = near.iter().map(|p| p.r_plus).collect();
    let t_cubic = lagrange_at_zero(&taus, &ts);
    let r_cubic = lagrange_at_zero(&taus, &rs);
    let t_quad = lagrange_at_zero(&taus[..3], &ts[..3]);
    let r_quad = lagrange_at_zero(&taus[..3], &rs[..3]);
    let stencil_gap = (t_cubic - t_quad).norm().max((r_cubic - r_quad).norm());
    if stencil_gap > DELTA_GEN {
        return Err(Error::Extrapolation(stencil_gap));
    }
    let class = if t_cubic.norm() < DELTA_GEN {
        Genericity::Generic
    } else if (t_cubic - 1.0).norm() < DELTA_GEN {
        Genericity::Transparent
    } else {
        Genericity::ExceptionalOther
    };
    Ok(Classification {
        class,
        t0: t_cubic,
        r_plus0: r_cubic,
        combination: t_cubic - 1.0 - r_cubic,
        stencil_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanityReport {
    /// `sup <τ> |T - 1|`
    pub transmission: f64,
    /// `sup <τ> |R_+|`
    pub reflection_plus: f64,
    /// `sup <τ> |R_-|`
    pub reflection_minus: f64,
    /// `sup |dT/dτ|` by finite differences between neighbouring nodes.
    pub transmission_slope: f64,
    pub unitarity: f64,
    /// `|R_±| < 1e-6` at every node.
    pub reflectionless: bool,
    pub blow_up: bool,
}

/// Measured constants of the coefficient bounds `|T - 1|, |R_±| ≲ <τ>^{-1}`.
pub fn scattering_sanity(sd: &ScatteringData) -> SanityReport {
    let mut pts = sd.points.clone();
    pts.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let bracket = |t: f64| (1.0 + t * t).sqrt();
    let sup = |f: &dyn Fn(&ScatteringPoint) -> f64| pts.iter().map(f).fold(0.0, f64::max);
    let transmission = sup(&|p| bracket(p.tau) * (p.t - 1.0).norm());
    let reflection_plus = sup(&|p| bracket(p.tau) * p.r_plus.norm());
    let reflection_minus = sup(&|p| bracket(p.tau) * p.r_minus.norm());
    let transmission_slope = pts
        .windows(2)
        .map(|w| (w[1].t - w[0].t).norm() / (w[1].tau - w[0].tau))
        .fold(0.0, f64::max);
    let unitarity = sd.max_unitarity_defect();
    let values = [transmission, reflection_plus, reflection_minus, transmission_slope, unitarity];
    SanityReport {
        transmission,
        reflection_plus,
        reflection_minus,
        transmission_slope,
        unitarity,
        reflectionless: pts.iter().all(|p| p.r_plus.norm() < 1e-6 && p.r_minus.norm() < 1e-6),
        blow_up: values.iter().any(|v| !v.is_finite()),
    }
}

/// Wronskian on the imaginary axis, `w(iσ)`, which is real for real `V`.
pub fn imaginary_wronskian(v: &Potential, sigma: f64) -> Result<f64> {
    let sol = solve_jost_at(v, C64::new(0.0, sigma), &JostOptions::default())?;
    Ok(sol.wronskian().re)
}

/// Zeros `σ` of `w(iσ)` on `(0, sqrt(max(-V)) + 0.5]`; each is a bound state
/// at energy `-σ²`.
pub fn bound_state_probe(v: &Potential) -> Result<Vec<f64>> {
    if v.is_zero() {
        return Ok(Vec::new());
    }
    let top = v.descriptor.well_depth().sqrt() + 0.5;
    let samples = 64;
    let sigmas: Vec<f64> = (1..=samples).map(|j| top * j as f64 / samples as f64).collect();
    let values = sigmas
        .par_iter()
        .map(|&s| imaginary_wronskian(v, s))
        .collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for j in 0..samples - 1 {
        if values[j] == 0.0 {
            roots.push(sigmas[j]);
        } else if values[j].signum() != values[j + 1].signum() {
            let (mut lo, mut hi) = (sigmas[j], sigmas[j + 1]);
            let mut f_lo = values[j];
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let f_mid = imaginary_wronskian(v, mid)?;
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    Ok(roots)
}

/// Normalised eigenfunction for a bound state at `-σ²`, glued from `f_+`
/// on `x >= 0` and `f_-` on `x < 0`.
pub fn bound_state(v: &Potential, sigma: f64) -> Result<Vec<C64>> {
    let sol = solve_jost_at(v, C64::new(0.0, sigma), &JostOptions::default())?;
    let grid = &v.grid;
    let mid = grid.zero_index();
    let plus = |i: usize| (-sigma * grid.x(i)).exp() * sol.m_plus[i];
    let minus = |i: usize| (sigma * grid.x(i)).exp() * sol.m_minus[i];
    let scale = plus(mid) / minus(mid);
    let mut psi: Vec<C64> = (0..grid.len())
        .map(|i| if i >= mid { plus(i) } else { scale * minus(i) })
        .collect();
    let norm = grid.l2_norm(&psi);
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::potential::{sample_potential, Descriptor};

    fn potential(d: Descriptor) -> Potential {
        sample_potential(d, &make_grid(40.0, 2048).unwrap()).unwrap()
    }

    #[test]
    fn free_jost_is_trivial() {
        let v = potential(Descriptor::Zero);
        let sol = solve_jost(&v, 1.7).unwrap();
        assert!(sol.m_plus.iter().chain(&sol.m_minus).all(|&m| m == C64::new(1.0, 0.0)));
        assert_eq!(sol.wronskian(), C64::new(0.0, 2.0 * 1.7));
    }

    #[test]
    fn soliton_matches_closed_form() {
        // m_+(x, k) = (k + i tanh x) / (k + i) for kappa = 1
        let v = potential(Descriptor::SolitonWell { kappa: 1.0 });
        for k in [0.3, 1.0, 7.5] {
            let sol = solve_jost(&v, k).unwrap();
            let kc = C64::new(k, 0.0);
            for i in (0..v.grid.len()).step_by(7) {
                let x = v.grid.x(i);
                let plus = (kc + I * x.tanh()) / (kc + I);
                let minus = (kc - I * x.tanh()) / (kc + I);
                assert!((sol.m_plus[i] - plus).norm() < 1e-9, "k={k} x={x}");
                assert!((sol.m_minus[i] - minus).norm() < 1e-9, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn wronskian_is_position_independent() {
        let v = potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 });
        let sol = solve_jost(&v, 1.3).unwrap();
        let w0 = sol.wronskian_at(300);
        for i in [700, 1024, 1100, 1800] {
            assert!((sol.wronskian_at(i) - w0).norm() < 1e-9);
        }
    }

    #[test]
    fn free_scattering() {
        let v = potential(Descriptor::Zero);
        let sd = scattering_data(&v, &tau_grid(5.0, 20)).unwrap();
        for p in &sd.points {
            assert_eq!(p.t, C64::new(1.0, 0.0));
            assert_eq!(p.r_plus, C64::new(0.0, 0.0));
            assert_eq!(p.w, C64::new(0.0, 2.0 * p.tau));
        }
        let c = classify_potential(&sd).unwrap();
        assert_eq!(c.class, Genericity::Transparent);
        assert_eq!(c.combination, C64::new(0.0, 0.0));
        let report = scattering_sanity(&sd);
        assert_eq!(report.transmission, 0.0);
        assert_eq!(report.reflection_plus, 0.0);
        assert_eq!(report.transmission_slope, 0.0);
    }

    #[test]
    fn rejects_nodes_below_delta() {
        let v = potential(Descriptor::Zero);
        assert!(scattering_data(&v, &[1e-4]).is_err());
    }

    #[test]
    fn soliton_bound_state() {
        let v = potential(Descriptor::SolitonWell { kappa: 1.0 });
        let roots = bound_state_probe(&v).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-9);
        let psi = bound_state(&v, roots[0]).unwrap();
        // sech(x) / sqrt(2)
        for i in (0..v.grid.len()).step_by(11) {
            let exact = 1.0 / v.grid.x(i).cosh() / 2f64.sqrt();
            assert!((psi[i].norm() - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn barrier_has_no_bound_state() {
        let v = potential(Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 });
        assert!(bound_state_probe(&v).unwrap().is_empty());
    }
}
