//! Linear and nonlinear evolution for `(i∂_t + Δ_V)u + λ|u|^{p-1}u = 0`,
//! with charge, decay and scattering diagnostics.
//!
//! Runs start at `t = 1`. The linear substep is the exact multiplier
//! `e^{-i dt λ}` in the distorted basis, the nonlinear substep the exact phase
//! rotation `u e^{iλ|u|^{p-1} dt/2}`, composed as a Strang splitting.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::SpatialGrid;
use crate::norms::sigma_norm;
use crate::operators::{free_propagator, weighted_j_norm, Nonlinearity};
use crate::potential::{Descriptor, Potential};
use crate::spectral::multiplier::Calculus;
use crate::table::Table;

/// Initial profile before normalization to `sigma_norm(u₀, s) = ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `e^{-(x-c)²/2w²} e^{ivx}`.
    Gaussian { width: f64, centre: f64, velocity: f64 },
    /// The free evolution of `e^{-x²/2w²}` taken back by `delay`, so the
    /// packet focuses `delay` time units after the start.
    FocusingChirp { width: f64, delay: f64 },
}

impl Profile {
    pub fn sample(&self, grid: &SpatialGrid) -> Vec<C64> {
        match *self {
            Profile::Gaussian { width, centre, velocity } => grid.sample(|x| {
                let y = (x - centre) / width;
                C64::from_polar((-0.5 * y * y).exp(), velocity * x)
            }),
            Profile::FocusingChirp { width, delay } => {
                // e^{-isΔ}: variance a -> a - 2is
                let a = width * width;
                let z = C64::new(a, -2.0 * delay);
                let amplitude = (C64::new(a, 0.0) / z).sqrt();
                grid.sample(|x| amplitude * (-x * x / (2.0 * z)).exp())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Gaussian { width, centre, velocity } => width > 0.0 && width.is_finite() && centre.is_finite() && velocity.is_finite(),
            Profile::FocusingChirp { width, delay } => width > 0.0 && width.is_finite() && delay.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad initial profile {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub p: f64,
    pub epsilon: f64,
    pub s: f64,
    pub profile: Profile,
    pub t_end: f64,
    /// Step before the first doubling breakpoint.
    pub dt: f64,
    pub potential: Descriptor,
    pub half_width: f64,
    pub points: usize,
    /// Regular spacing of stored snapshots.
    pub sample_interval: f64,
    /// The step may double at `breakpoint · 2^k`.
    pub breakpoint: f64,
    /// Cap on the nonlinear phase `|λ| ‖u‖_∞^{p-1} dt` per step.
    pub phase_cap: f64,
    pub blowup_factor: f64,
    /// Width of the boundary layer that the packet must avoid.
    pub boundary_layer: f64,
    /// Largest admissible mass fraction inside the boundary layer.
    pub boundary_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: 4.0,
            epsilon: 0.05,
            s: 0.6,
            profile: Profile::Gaussian { width: 1.5, centre: 2.0, velocity: 1.0 },
            t_end: 200.0,
            dt: 0.01,
            potential: Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 },
            half_width: 2400.0,
            points: 16384,
            sample_interval: 1.0,
            breakpoint: 10.0,
            phase_cap: 0.1,
            blowup_factor: 10.0,
            boundary_layer: 5.0,
            boundary_tolerance: 1e-10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.lambda.is_finite() && self.lambda != 0.0) {
            return bad(format!("lambda must be finite and nonzero, got {}", self.lambda));
        }
        if !(self.p > 3.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 3, got {}", self.p));
        }
        if !(self.s > 0.5 && self.s.is_finite()) {
            return bad(format!("s must exceed 1/2, got {}", self.s));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.t_end > 1.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must exceed the start time 1, got {}", self.t_end));
        }
        for (name, v) in [
            ("dt", self.dt),
            ("sample_interval", self.sample_interval),
            ("breakpoint", self.breakpoint),
            ("phase_cap", self.phase_cap),
            ("boundary_tolerance", self.boundary_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.blowup_factor > 1.0) {
            return bad(format!("blowup_factor must exceed 1, got {}", self.blowup_factor));
        }
        if !(self.boundary_layer >= 0.0 && self.boundary_layer < self.half_width) {
            return bad(format!("boundary_layer must lie in [0, L), got {}", self.boundary_layer));
        }
        self.profile.validate()?;
        self.potential.validate()
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.half_width, self.points)
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity { lambda: self.lambda, p: self.p }
    }

    /// The profile scaled so that `sigma_norm(u₀, s) = ε`.
    pub fn initial_data(&self, grid: &SpatialGrid) -> Result<WaveField> {
        self.profile.validate()?;
        let mut u = self.profile.sample(grid);
        let size = sigma_norm(grid, &u, self.s)?;
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::InvalidParameter("initial profile vanishes on the grid".into()));
        }
        let scale = self.epsilon / size;
        u.iter_mut().for_each(|z| *z *= scale);
        WaveField::new(grid, u, 1.0)
    }

    /// Doubles the number of points and halves `dt` `k` times.
    pub fn refined(&self, k: u32) -> Self {
        let factor = 1usize << k;
        Self { points: self.points * factor, dt: self.dt / factor as f64, ..self.clone() }
    }
}

/// `e^{i(t1-t0)Δ_V} u`: the multiplier `e^{-i(t1-t0)λ}` on the continuous
/// part plus the phases of any bound states kept aside by the basis.
pub fn evolve_linear(calc: &Calculus, t0: f64, t1: f64, u: &[C64]) -> Result<Vec<C64>> {
    let grid = calc.grid();
    grid.check(u.len())?;
    let h = t1 - t0;
    if !h.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time span [{t0}, {t1}]")));
    }
    if h == 0.0 {
        return Ok(u.to_vec());
    }
    let mut out = calc.apply_multiplier(u, |lambda| C64::from_polar(1.0, -h * lambda))?;
    if let Calculus::Potential(basis) = calc {
        let coefficients = basis.bound_state_coefficients(u);
        for (b, c) in basis.bound_states().iter().zip(coefficients) {
            let c = c * C64::from_polar(1.0, -h * b.energy);
            out.iter_mut().zip(&b.profile).for_each(|(o, phi)| *o += c * phi);
        }
    }
    Ok(out)
}

/// `e^{i(t-t0)Δ_V} u₀` at each of `times`, each computed directly from `u₀`.
pub fn linear_trajectory(calc: &Calculus, u0: &WaveField, times: &[f64]) -> Result<Vec<WaveField>> {
    times
        .par_iter()
        .map(|&t| Ok(WaveField { values: evolve_linear(calc, u0.t, t, &u0.values)?, t }))
        .collect()
}

fn nonlinear_phase(nl: &Nonlinearity, u: &mut [C64], h: f64) {
    for z in u.iter_mut() {
        let m = z.norm();
        if m > 0.0 {
            *z *= C64::from_polar(1.0, nl.lambda * m.powf(nl.p - 1.0) * h);
        }
    }
}

/// `e^{ihΔ_V}` for the Fourier-collocation operator `H = -∂² + V` on the
/// periodic grid, by Chebyshev expansion of `e^{-ihH}`.
///
/// Whole-line eigenfunctions sampled on the periodic box are not exactly
/// orthogonal (the exterior waves do not match across the seam at `±L`), so
/// `F_V^† F_V` differs from the identity by an operator of norm `O(1)` that
/// lives on fields touching the seam. One distorted-basis step is accurate,
/// but thousands of them amplify seam noise. The collocation operator is
/// Hermitian and its propagator unitary to round-off.
#[derive(Debug, Clone)]
pub struct StepPropagator<'a> {
    v: &'a Potential,
    centre: f64,
    radius: f64,
}

/// Coefficients below this size end the Chebyshev series.
const CHEBYSHEV_CUTOFF: f64 = 1e-16;

impl<'a> StepPropagator<'a> {
    pub fn new(v: &'a Potential) -> Self {
        let grid = &v.grid;
        let lo = v.samples.iter().copied().fold(0.0, f64::min);
        let hi = grid.max_frequency().powi(2) + v.samples.iter().copied().fold(0.0, f64::max);
        // small margin keeps the spectrum strictly inside [-1, 1]
        let pad = 1e-3 * (hi - lo) + 1e-12;
        Self { v, centre: 0.5 * (hi + lo), radius: 0.5 * (hi - lo) + pad }
    }

    /// Chebyshev coefficients of `e^{-izx}` on `[-1, 1]`, from a cosine
    /// quadrature on enough nodes to resolve the decay of the series.
    fn coefficients(z: f64) -> Vec<C64> {
        let degree = (z.abs() + 12.0 * z.abs().cbrt() + 30.0).ceil() as usize;
        let m = 2 * degree + 64;
        let thetas: Vec<f64> = (0..m).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64).collect();
        let values: Vec<C64> = thetas.iter().map(|th| C64::from_polar(1.0, -z * th.cos())).collect();
        let mut out = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let sum: C64 = thetas.iter().zip(&values).map(|(th, f)| f * (k as f64 * th).cos()).sum();
            let a = sum * (if k == 0 { 1.0 } else { 2.0 } / m as f64);
            if k > z.abs() as usize + 2 && a.norm() < CHEBYSHEV_CUTOFF {
                break;
            }
            out.push(a);
        }
        out
    }

    fn scaled_hamiltonian(&self, u: &[C64]) -> Vec<C64> {
        let d2 = self.v.grid.second_derivative(u);
        d2.iter()
            .zip(u)
            .zip(&self.v.samples)
            .map(|((d, z), w)| (-d + z * (w - self.centre)) / self.radius)
            .collect()
    }

    /// `e^{ihΔ_V} u`.
    pub fn apply(&self, h: f64, u: &[C64]) -> Result<Vec<C64>> {
        let grid = &self.v.grid;
        grid.check(u.len())?;
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite step {h}")));
        }
        if h == 0.0 {
            return Ok(u.to_vec());
        }
        if self.v.is_zero() {
            return Ok(grid.apply_symbol(u, |xi| C64::from_polar(1.0, -h * xi * xi)));
        }
        let a = Self::coefficients(h * self.radius);
        let mut prev = u.to_vec();
        let mut out: Vec<C64> = u.iter().map(|z| z * a[0]).collect();
        if a.len() > 1 {
            let mut cur = self.scaled_hamiltonian(u);
            out.iter_mut().zip(&cur).for_each(|(o, z)| *o += a[1] * z);
            for ak in &a[2..] {
                let hc = self.scaled_hamiltonian(&cur);
                let next: Vec<C64> = hc.iter().zip(&prev).map(|(y, p)| 2.0 * y - p).collect();
                out.iter_mut().zip(&next).for_each(|(o, z)| *o += ak * z);
                prev = std::mem::replace(&mut cur, next);
            }
        }
        let phase = C64::from_polar(1.0, -h * self.centre);
        out.iter_mut().for_each(|z| *z *= phase);
        Ok(out)
    }
}

/// One Strang step of length `h`.
pub fn strang_step(step: &StepPropagator, nl: &Nonlinearity, h: f64, u: &mut Vec<C64>) -> Result<()> {
    nonlinear_phase(nl, u, 0.5 * h);
    *u = step.apply(h, u)?;
    nonlinear_phase(nl, u, 0.5 * h);
    Ok(())
}

/// Stored snapshots of a run, in increasing time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<WaveField>,
    /// Indices of the samples taken at `t = 2^k`.
    pub checkpoints: Vec<usize>,
    pub steps: usize,
    /// Largest step taken.
    pub max_dt: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|u| u.t).collect()
    }

    pub fn last(&self) -> &WaveField {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Samples at the dyadic checkpoints.
    pub fn checkpoint_fields(&self) -> Vec<&WaveField> {
        self.checkpoints.iter().map(|&i| &self.samples[i]).collect()
    }
}

fn boundary_fraction(grid: &SpatialGrid, u: &[C64], layer: f64) -> f64 {
    let edge = grid.half_width() - layer;
    let mut outer = 0.0;
    let mut total = 0.0;
    for (i, z) in u.iter().enumerate() {
        let m = z.norm_sqr();
        total += m;
        if grid.x(i).abs() > edge {
            outer += m;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Times at which a step must end: doubling breakpoints, dyadic checkpoints
/// and the final time.
fn stops(config: &ExperimentConfig) -> Vec<f64> {
    let mut out = vec![config.t_end];
    let mut b = config.breakpoint;
    while b < config.t_end {
        if b > 1.0 {
            out.push(b);
        }
        b *= 2.0;
    }
    let mut d = 2.0;
    while d < config.t_end {
        out.push(d);
        d *= 2.0;
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn is_dyadic(t: f64) -> bool {
    let k = t.log2().round();
    k >= 0.0 && (t - k.exp2()).abs() <= 1e-12 * t
}

/// Strang-split evolution from `u₀` at `t = 1` to `t_end`.
///
/// The step starts at `config.dt`; at each breakpoint `breakpoint · 2^k` it
/// doubles when the doubled step keeps the nonlinear phase below
/// `phase_cap`. Snapshots are stored every `sample_interval` and at
/// `t = 2^k`.
pub fn evolve_nls(v: &Potential, config: &ExperimentConfig, u0: &WaveField) -> Result<Trajectory> {
    config.validate()?;
    let grid = &v.grid;
    let step = StepPropagator::new(v);
    grid.check(u0.len())?;
    if (u0.t - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("runs start at t = 1, initial data stamped {}", u0.t)));
    }
    let nl = config.nonlinearity();
    let limit = config.blowup_factor * u0.sup_norm();
    let phase = |u: &[C64], h: f64| nl.lambda.abs() * crate::norms::sup_norm(u).powf(nl.p - 1.0) * h;
    if phase(&u0.values, config.dt) > config.phase_cap {
        return Err(Error::InvalidParameter(format!(
            "initial step {} gives nonlinear phase above {}",
            config.dt, config.phase_cap
        )));
    }
    let guard = |t: f64, u: &[C64]| -> Result<()> {
        let sup = crate::norms::sup_norm(u);
        if !(sup <= limit) {
            return Err(Error::BlowUp { t, sup, limit });
        }
        let fraction = boundary_fraction(grid, u, config.boundary_layer);
        if fraction > config.boundary_tolerance {
            return Err(Error::BoundaryContact { t, fraction });
        }
        Ok(())
    };
    guard(1.0, &u0.values)?;

    let mut samples = vec![u0.clone()];
    let mut checkpoints = vec![0];
    let mut u = u0.values.clone();
    let mut t = 1.0;
    let mut dt = config.dt;
    let mut max_dt: f64 = 0.0;
    let mut steps = 0;
    let mut next_sample = 1.0 + config.sample_interval;
    for stop in stops(config) {
        let span = stop - t;
        let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        max_dt = max_dt.max(h);
        let start = t;
        for i in 1..=n {
            strang_step(&step, &nl, h, &mut u)?;
            t = if i == n { stop } else { start + i as f64 * h };
            steps += 1;
            let at_stop = i == n;
            if t >= next_sample - 1e-9 * h || at_stop {
                guard(t, &u)?;
                if t >= next_sample - 1e-9 * h || is_dyadic(t) || at_stop && stop == config.t_end {
                    if at_stop && is_dyadic(t) {
                        checkpoints.push(samples.len());
                    }
                    samples.push(WaveField { values: u.clone(), t });
                    while next_sample <= t + 1e-9 * h {
                        next_sample += config.sample_interval;
                    }
                }
            }
        }
        let doubling_point = {
            let k = (t / config.breakpoint).log2().round();
            k >= 0.0 && (t - config.breakpoint * k.exp2()).abs() <= 1e-12 * t
        };
        if doubling_point && phase(&u, 2.0 * dt) <= config.phase_cap {
            dt *= 2.0;
        }
    }
    Ok(Trajectory { samples, checkpoints, steps, max_dt })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    /// `max_n |‖u(t_n)‖₂ / ‖u(t_0)‖₂ - 1|`.
    pub drift: f64,
}

pub fn conservation_check(grid: &SpatialGrid, samples: &[WaveField]) -> Result<ConservationReport> {
    let first = samples.first().ok_or_else(|| Error::Trajectory("empty trajectory".into()))?;
    let initial = first.l2_norm(grid);
    let norms: Vec<f64> = samples.iter().map(|u| u.l2_norm(grid)).collect();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max = norms.iter().copied().fold(0.0, f64::max);
    let drift = norms.iter().map(|n| (n / initial - 1.0).abs()).fold(0.0, f64::max);
    Ok(ConservationReport { initial, min, max, drift })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRecord {
    pub s: f64,
    pub times: Vec<f64>,
    pub sup: Vec<f64>,
    pub l2: Vec<f64>,
    /// `‖|J_V(t)|^s u(t)‖₂`.
    pub jv: Vec<f64>,
    /// `sup_n √t_n ‖u(t_n)‖_∞`.
    pub weighted_sup: f64,
    /// Least-squares slope of `-log ‖u‖_∞` against `log t` over `[T/2, T]`.
    pub alpha: f64,
    pub intercept: f64,
    /// `max_n jv_n / jv_0`.
    pub jv_growth: f64,
    /// `√t‖u‖_∞ / (‖u‖₂^{1-1/2s} ‖|J_V|^s u‖₂^{1/2s})` at each sample.
    pub interpolation_ratio: Vec<f64>,
    /// Largest interpolation ratio: the measured `C`.
    pub interpolation_constant: f64,
    /// `√t‖u‖_∞` is non-increasing over `[T/10, T]`.
    pub last_decade_non_increasing: bool,
}

/// Relative slack allowed between consecutive samples in the monotonicity test.
pub const MONOTONE_SLACK: f64 = 1e-6;

/// Least-squares `(slope, intercept)` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn decay_report(calc: &Calculus, samples: &[WaveField], s: f64) -> Result<DecayRecord> {
    if samples.len() < 4 {
        return Err(Error::Trajectory(format!("need at least 4 samples, got {}", samples.len())));
    }
    let grid = calc.grid();
    let t0 = samples[0].t;
    let t_end = samples[samples.len() - 1].t;
    if !(t0 > 0.0 && t_end >= 10.0 * t0) {
        return Err(Error::Trajectory(format!("samples span [{t0}, {t_end}], less than a decade")));
    }
    let times: Vec<f64> = samples.iter().map(|u| u.t).collect();
    let sup: Vec<f64> = samples.iter().map(|u| u.sup_norm()).collect();
    let l2: Vec<f64> = samples.iter().map(|u| u.l2_norm(grid)).collect();
    let jv: Vec<f64> = samples.par_iter().map(|u| weighted_j_norm(calc, s, u.t, &u.values)).collect::<Result<_>>()?;
    let weighted: Vec<f64> = times.iter().zip(&sup).map(|(t, m)| t.sqrt() * m).collect();
    let weighted_sup = weighted.iter().copied().fold(0.0, f64::max);

    let tail: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= 0.5 * t_end).collect();
    if tail.len() < 2 {
        return Err(Error::Trajectory("fewer than two samples in the second half".into()));
    }
    let lx: Vec<f64> = tail.iter().map(|&i| times[i].ln()).collect();
    let ly: Vec<f64> = tail.iter().map(|&i| sup[i].ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);

    let jv_growth = jv.iter().copied().fold(0.0, f64::max) / jv[0];
    let interpolation_ratio: Vec<f64> = (0..times.len())
        .map(|i| {
            let e = 1.0 / (2.0 * s);
            weighted[i] / (l2[i].powf(1.0 - e) * jv[i].powf(e))
        })
        .collect();
    let interpolation_constant = interpolation_ratio.iter().copied().fold(0.0, f64::max);
    let decade: Vec<f64> = (0..times.len()).filter(|&i| times[i] >= 0.1 * t_end).map(|i| weighted[i]).collect();
    let last_decade_non_increasing = decade.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    Ok(DecayRecord {
        s,
        times,
        sup,
        l2,
        jv,
        weighted_sup,
        alpha: -slope,
        intercept,
        jv_growth,
        interpolation_ratio,
        interpolation_constant,
        last_decade_non_increasing,
    })
}

impl DecayRecord {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["t", "sup", "l2", "jv", "weighted_sup", "interpolation_ratio"]);
        for i in 0..self.times.len() {
            let t = self.times[i];
            table.push(vec![t, self.sup[i], self.l2[i], self.jv[i], t.sqrt() * self.sup[i], self.interpolation_ratio[i]]);
        }
        table
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringState {
    /// `e^{-iTΔ} u(T)` at the last sample.
    pub u_plus: WaveField,
    pub checkpoint_times: Vec<f64>,
    /// `‖v(t_{k+1}) - v(t_k)‖₂` with `v(t) = e^{-itΔ} u(t)`.
    pub cauchy: Vec<f64>,
    /// `false` means scattering was not observed on this run.
    pub decreasing: bool,
}

/// Pulls the solution back by the free group at each dyadic checkpoint.
pub fn extract_scattering_state(grid: &SpatialGrid, trajectory: &Trajectory) -> Result<ScatteringState> {
    let last = trajectory.last();
    if last.t < 50.0 {
        return Err(Error::Trajectory(format!("run ends at t = {}, scattering needs t >= 50", last.t)));
    }
    let fields = trajectory.checkpoint_fields();
    if fields.len() < 3 {
        return Err(Error::Trajectory(format!("only {} dyadic checkpoints", fields.len())));
    }
    let pulled: Vec<Vec<C64>> = fields.par_iter().map(|u| free_propagator(grid, -u.t, &u.values)).collect::<Result<_>>()?;
    let cauchy: Vec<f64> = pulled
        .windows(2)
        .map(|w| {
            let d: Vec<C64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            grid.l2_norm(&d)
        })
        .collect();
    let decreasing = cauchy.windows(2).all(|w| w[1] < w[0]);
    let u_plus = WaveField { values: free_propagator(grid, -last.t, &last.values)?, t: last.t };
    Ok(ScatteringState { u_plus, checkpoint_times: fields.iter().map(|u| u.t).collect(), cauchy, decreasing })
}
