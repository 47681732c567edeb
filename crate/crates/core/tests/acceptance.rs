//! Acceptance run: one PASS/FAIL line per criterion, with the measured value,
//! the pinned tolerance and the wall time against its budget.

use std::process::ExitCode;
use std::time::Instant;

use disperse::dynamics::{conservation_check, decay_report, evolve_nls, extract_scattering_state, ExperimentConfig};
use disperse::jost::{scattering_data, tau_grid};
use disperse::operators::{a_apply, a_bound_ratio, commutator_residual, weighted_j_power, ARoute};
use disperse::spectral::equivalence::{equivalence_battery, equivalence_constant, norm_equiv_ratio};
use disperse::spectral::kato::{kato_fractional, KatoQuadrature};
use disperse::spectral::littlewood_paley::{band_limited_field, envelope, envelope_non_growing, quasidiag_check, LpWindow};
use disperse::spectral::resolvent::{pointwise_bound_constant, sandwich_bound_constant};
use disperse::spectral::{BasisOptions, BoundStatePolicy, Calculus, DistortedBasis};
use disperse::dynamics::linear_trajectory;
use disperse::{make_grid, sample_potential, Descriptor, Potential, Result, SpatialGrid, WaveField, C64};

const BARRIER: Descriptor = Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 };
const WELL: Descriptor = Descriptor::SolitonWell { kappa: 1.0 };

type Outcome = Result<(bool, String)>;

fn rel(grid: &SpatialGrid, a: &[C64], b: &[C64]) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.l2_norm(&d) / grid.l2_norm(b)
}

fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn continuous_only() -> BasisOptions {
    BasisOptions { bound_states: BoundStatePolicy::ContinuousOnly, ..BasisOptions::default() }
}

fn unitarity() -> Outcome {
    let grid = make_grid(40.0, 2048)?;
    let mut worst: f64 = 0.0;
    for d in [BARRIER, WELL] {
        let v = sample_potential(d, &grid)?;
        worst = worst.max(scattering_data(&v, &tau_grid(10.0, 400))?.max_unitarity_defect());
    }
    Ok((worst < 1e-7, format!("max ||T|²+|R±|²-1| = {worst:.3e} < 1e-7")))
}

fn free_reduction() -> Outcome {
    let grid = make_grid(40.0, 1024)?;
    let v = Potential::zero(&grid);
    let sd = scattering_data(&v, &tau_grid(10.0, 100))?;
    let t_err = sd.points.iter().map(|p| (p.t - 1.0).norm()).fold(0.0, f64::max);
    let basis = DistortedBasis::new(&v)?;
    let mut psi_err: f64 = 0.0;
    for i in 0..grid.len() {
        for k in 0..grid.len() {
            let exact = C64::from_polar(1.0, grid.xi(k) * grid.x(i));
            psi_err = psi_err.max((basis.psi(i, k) - exact).norm());
        }
    }
    let f = grid.sample(|x| C64::new((-(x - 1.0) * (x - 1.0)).exp(), 0.4 * x * (-0.5 * x * x).exp()));
    let (distorted, free) = (Calculus::Potential(&basis), Calculus::Free(&grid));
    let ft_err = rel(&grid, &distorted.forward(&f)?, &free.forward(&f)?);
    let mut j_err: f64 = 0.0;
    for (s, t) in [(0.6, 1.0), (1.0, 3.0), (1.5, 10.0)] {
        j_err = j_err.max(rel(&grid, &weighted_j_power(&distorted, s, t, &f)?, &weighted_j_power(&free, s, t, &f)?));
    }
    let worst = t_err.max(psi_err).max(ft_err).max(j_err);
    Ok((
        worst < 1e-8,
        format!("|T-1| {t_err:.1e}, |Ψ-e^(iτx)| {psi_err:.1e}, F_V vs F {ft_err:.1e}, |J_V|^s vs |J|^s {j_err:.1e}; max < 1e-8"),
    ))
}

/// Transmission of `v0` on `|x| < a` from the transfer matrix of
/// `(ψ, ψ')` across the barrier.
fn transfer_matrix_transmission(v0: f64, a: f64, k: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let d = 2.0 * a;
    let q = C64::new(k * k - v0, 0.0).sqrt();
    let (c, s) = ((q * d).cos(), (q * d).sin());
    let s_over_q = if q.norm() < 1e-9 { C64::new(d, 0.0) } else { s / q };
    // (ψ, ψ')(-a) = M^{-1} (e^{ika}, ik e^{ika}) for the solution equal to e^{ikx} on the right
    let (r0, r1) = ((i * k * a).exp(), i * k * (i * k * a).exp());
    let p = c * r0 - s_over_q * r1;
    let dp = q * s * r0 + c * r1;
    2.0 * i * k * (-i * k * a).exp() / (dp + i * k * p)
}

fn square_barrier_oracle() -> Outcome {
    let (v0, a) = (1.0, 1.0);
    let grid = make_grid(40.0, 2048)?;
    let v = sample_potential(Descriptor::SquareBarrier { v0, a }, &grid)?;
    let taus: Vec<f64> = (0..=99).map(|j| 0.1 + 9.9 * j as f64 / 99.0).collect();
    let sd = scattering_data(&v, &taus)?;
    let worst = sd
        .points
        .iter()
        .map(|p| (p.t - transfer_matrix_transmission(v0, a, p.tau)).norm())
        .fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("max |T - T_oracle| = {worst:.3e} < 1e-6 over τ ∈ [0.1, 10]")))
}

fn plancherel() -> Outcome {
    let grid = make_grid(40.0, 2048)?;
    let basis = DistortedBasis::new(&sample_potential(BARRIER, &grid)?)?;
    let battery: Vec<Vec<C64>> = (0..10)
        .map(|j| {
            let jf = j as f64;
            let (centre, width, freq) = (-6.0 + 1.3 * jf, 0.6 + 0.25 * jf, 1.7 * (jf - 4.5) / 4.5);
            grid.sample(|x| {
                let y = (x - centre) / width;
                let poly = if j % 2 == 0 { 1.0 } else { y };
                C64::from_polar(poly * (-0.5 * y * y).exp(), freq * x)
            })
        })
        .collect();
    let defect = basis.plancherel_defect(&battery);
    Ok((defect < 1e-6, format!("max |‖F_V f‖/‖f‖ - 1| = {defect:.3e} < 1e-6")))
}

fn kato_vs_multiplier() -> Outcome {
    let grid = make_grid(40.0, 2048)?;
    let v = sample_potential(BARRIER, &grid)?;
    let basis = DistortedBasis::new(&v)?;
    let calc = Calculus::Potential(&basis);
    let f = grid.sample(|x| C64::new((-0.5 * (x - 0.5) * (x - 0.5)).exp(), 0.3 * x * (-0.5 * x * x).exp()));
    let q = KatoQuadrature::default();
    let mut worst: f64 = 0.0;
    for s in [0.3, 0.5, 1.0, 1.5] {
        worst = worst.max(rel(&grid, &kato_fractional(&v, s, &f, &q)?, &calc.fractional_power(s, &f)?));
    }
    Ok((worst < 1e-3, format!("max relative L² gap = {worst:.3e} < 1e-3")))
}

fn a_routes(grid: &SpatialGrid, s: f64) -> Result<(f64, f64)> {
    let v = sample_potential(BARRIER, grid)?;
    let basis = DistortedBasis::new(&v)?;
    let calc = Calculus::Potential(&basis);
    let f = grid.sample(|x| C64::new((-0.5 * x * x).exp(), 0.0));
    let q = KatoQuadrature::default();
    let kato = a_apply(&v, &calc, s, &f, ARoute::Kato, &q)?;
    let commutator = a_apply(&v, &calc, s, &f, ARoute::Commutator, &q)?;
    Ok((rel(grid, &commutator, &kato), a_bound_ratio(grid, &kato, &f)))
}

fn a_operator() -> Outcome {
    let s = 0.5;
    let (route_gap, ratio) = a_routes(&make_grid(80.0, 4096)?, s)?;
    let (_, ratio_fine) = a_routes(&make_grid(80.0, 8192)?, s)?;
    let stability = gap(ratio, ratio_fine);
    Ok((
        route_gap < 1e-3 && ratio.is_finite() && stability < 0.1,
        format!("s = {s}: routes {route_gap:.3e} < 1e-3; ‖Af‖₁/‖f‖∞ = {ratio:.4} vs {ratio_fine:.4} refined ({stability:.1e} < 0.1)"),
    ))
}

fn residual_at(grid: &SpatialGrid, dt: f64, samples: usize) -> Result<f64> {
    let v = Potential::zero(grid);
    let calc = Calculus::Free(grid);
    let u0 = WaveField::new(grid, grid.sample(|x| C64::new((-0.5 * x * x).exp(), 0.0)), 1.0)?;
    let times: Vec<f64> = (0..samples).map(|m| 1.0 + m as f64 * dt).collect();
    let traj = linear_trajectory(&calc, &u0, &times)?;
    let r = commutator_residual(&v, &calc, 1.0, &traj, None, ARoute::Commutator, &KatoQuadrature::default())?;
    Ok(r.iter().map(|x| x.relative).fold(0.0, f64::max))
}

fn commutator() -> Outcome {
    let grid = make_grid(40.0, 2048)?;
    let coarse = residual_at(&grid, 0.01, 9)?;
    let fine = residual_at(&grid, 0.0025, 33)?;
    let reduction = coarse / fine;
    Ok((
        coarse < 1e-5 && reduction >= 8.0,
        format!("residual {coarse:.3e} < 1e-5 at dt = 0.01; reduction {reduction:.1}× >= 8 at dt/4"),
    ))
}

fn quasidiag() -> Outcome {
    let grid = make_grid(160.0, 8192)?;
    let window = LpWindow::resolved(&grid)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, d) in [("generic", BARRIER), ("well", WELL)] {
        let basis = DistortedBasis::with_options(&sample_potential(d, &grid)?, &continuous_only())?;
        let calc = Calculus::Potential(&basis);
        let mut entries = Vec::new();
        for k in window.indices() {
            let f_k = band_limited_field(&grid, k, 0.0);
            for j in window.indices().filter(|j| (j - k).abs() <= 8) {
                entries.push(quasidiag_check(&calc, j, k, &f_k)?);
            }
        }
        let env = envelope(&entries);
        let peak = env.iter().copied().fold(0.0, f64::max);
        let reach = env.len() - 1;
        ok &= peak.is_finite() && peak < 4.0 && reach == 8 && envelope_non_growing(&env[1..], 0.05);
        detail.push(format!("{name}: peak {peak:.3}, distance 8 {:.1e}", env[reach]));
    }
    Ok((ok, format!("{}; envelope bounded by 4, non-growing from distance 1", detail.join("; "))))
}

fn equivalence_constants(points: usize) -> Result<Vec<f64>> {
    let grid = make_grid(40.0, points)?;
    let basis = DistortedBasis::new(&sample_potential(BARRIER, &grid)?)?;
    let (free, potential) = (Calculus::Free(&grid), Calculus::Potential(&basis));
    let battery = equivalence_battery(&grid);
    [0.1, 0.25, 0.4]
        .iter()
        .map(|&s| {
            let ratios = battery.iter().map(|f| norm_equiv_ratio(&free, &potential, s, f)).collect::<Result<Vec<_>>>()?;
            Ok(equivalence_constant(&ratios))
        })
        .collect()
}

fn norm_equivalence() -> Outcome {
    let coarse = equivalence_constants(2048)?;
    let fine = equivalence_constants(4096)?;
    let worst_gap = coarse.iter().zip(&fine).map(|(a, b)| gap(*a, *b)).fold(0.0, f64::max);
    let c = coarse.iter().copied().fold(1.0, f64::max);
    Ok((
        c <= 1.5 && worst_gap < 0.1,
        format!("C(s) = {coarse:.4?} <= 1.5, refined {fine:.4?}, change {worst_gap:.1e} < 0.1"),
    ))
}

fn decay_and_scattering() -> Outcome {
    let base = ExperimentConfig::default();
    let grid = base.grid()?;
    let v = sample_potential(base.potential, &grid)?;
    let basis = DistortedBasis::new(&v)?;
    let calc = Calculus::Potential(&basis);
    let mut ok = true;
    let mut detail = Vec::new();
    for lambda in [1.0, -1.0] {
        let config = ExperimentConfig { lambda, ..base.clone() };
        let u0 = config.initial_data(&grid)?;
        let run = evolve_nls(&v, &config, &u0)?;
        let drift = conservation_check(&grid, &run.samples)?.drift;
        let record = decay_report(&calc, &run.samples, config.s)?;
        let state = extract_scattering_state(&grid, &run)?;
        let parts = [
            record.weighted_sup.is_finite() && record.last_decade_non_increasing,
            (0.45..=0.55).contains(&record.alpha),
            record.jv_growth < 2.0,
            drift < 1e-6,
            state.decreasing,
        ];
        ok &= parts.iter().all(|p| *p);
        detail.push(format!(
            "λ = {lambda}: (a) {} sup √t‖u‖∞ = {:.4}, (b) α = {:.4}, (c) growth {:.3}, (d) drift {drift:.1e}, (e) {} d_k",
            if parts[0] { "non-increasing" } else { "rising" },
            record.weighted_sup,
            record.alpha,
            record.jv_growth,
            if parts[4] { "decreasing" } else { "non-monotone" },
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn resolvent_constants(points: usize, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = make_grid(40.0, points)?;
    let v = sample_potential(BARRIER, &grid)?;
    let f = grid.sample(|x| C64::new((-x * x / 4.0).exp(), 0.0));
    taus.iter()
        .map(|&tau| Ok((pointwise_bound_constant(&v, tau, &f)?, sandwich_bound_constant(&v, tau, &f)?)))
        .collect()
}

fn resolvent_bounds() -> Outcome {
    let taus: Vec<f64> = (0..=8).map(|j| 0.01 * 10f64.powf(0.5 * j as f64)).collect();
    let coarse = resolvent_constants(2048, &taus)?;
    let fine = resolvent_constants(4096, &taus)?;
    let finite = coarse.iter().chain(&fine).all(|(a, b)| a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0);
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| gap(c.0, f.0).max(gap(c.1, f.1)))
        .fold(0.0, f64::max);
    let top = coarse.iter().map(|(a, b)| a.max(*b)).fold(0.0, f64::max);
    Ok((finite && worst < 0.1, format!("largest constant {top:.4}, refinement change {worst:.1e} < 0.1 over τ ∈ [0.01, 100]")))
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 11] = [
        ("unitarity of scattering data", 10.0, unitarity),
        ("free reduction", 10.0, free_reduction),
        ("square-barrier transfer-matrix oracle", 5.0, square_barrier_oracle),
        ("distorted Plancherel", 30.0, plancherel),
        ("dual-route fractional power", 60.0, kato_vs_multiplier),
        ("A(s) routes and bound", 60.0, a_operator),
        ("commutator residual", 120.0, commutator),
        ("quasi-diagonality", 120.0, quasidiag),
        ("norm equivalence", 60.0, norm_equivalence),
        ("decay and scattering", 900.0, decay_and_scattering),
        ("resolvent bound shape", 60.0, resolvent_bounds),
    ];
    let mut failures = 0;
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs < *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{secs:.1} s / {budget:.0} s]",
            if passed { "PASS" } else { "FAIL" },
            n + 1
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
