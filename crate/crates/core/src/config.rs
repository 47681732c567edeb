//! Plain-text run configuration (TOML).
//!
//! Every field has a default, so an empty file is a valid config. Unknown
//! keys are rejected. The resolved config serializes back to TOML, which is
//! what run manifests echo.
//!
//! ```toml
//! potential = "gaussian_barrier(v0=1, sigma=1)"
//!
//! [grid]
//! half_width = 40.0
//! points = 2048
//!
//! [decay]
//! lambda = -1.0
//! profile = { kind = "gaussian", width = 1.5, centre = 0.0, velocity = 0.0 }
//! ```

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::ExperimentConfig;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::potential::Descriptor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: 40.0, points: 2048 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.half_width, self.points)
    }
}

/// `scatter`: Jost solutions and scattering data on a τ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub tau_max: f64,
    pub tau_count: usize,
    pub unitarity_tolerance: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self { tau_max: 10.0, tau_count: 200, unitarity_tolerance: 1e-7 }
    }
}

/// `spectral-check`: basis certificate, multiplier algebra, the Kato route and
/// the resolvent bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub plancherel_tolerance: f64,
    /// Orders `s` of `(-Δ_V)^{s/2}` compared across the two routes.
    pub powers: Vec<f64>,
    pub kato_tolerance: f64,
    pub homomorphism_tolerance: f64,
    pub resolvent_taus: Vec<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            plancherel_tolerance: 1e-6,
            powers: vec![0.3, 0.5, 1.0, 1.5],
            kato_tolerance: 1e-3,
            homomorphism_tolerance: 1e-6,
            resolvent_taus: vec![0.01, 0.1, 1.0, 10.0, 100.0],
        }
    }
}

/// `norm-equiv`: the quasi-diagonality sweep and the homogeneous norm ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormEquivConfig {
    pub powers: Vec<f64>,
    /// Ratios must lie in `[1/band, band]`.
    pub band: f64,
    /// Second potential swept alongside the main one.
    pub companion: Descriptor,
    pub max_offset: i32,
    /// Relative rise tolerated between neighbouring envelope entries.
    pub envelope_slack: f64,
    /// Largest admissible envelope value.
    pub envelope_bound: f64,
}

impl Default for NormEquivConfig {
    fn default() -> Self {
        Self {
            powers: vec![0.1, 0.25, 0.4],
            band: 1.5,
            companion: Descriptor::SolitonWell { kappa: 1.0 },
            max_offset: 8,
            envelope_slack: 0.05,
            envelope_bound: 4.0,
        }
    }
}

/// `commutator-check`: residual of the commutator relation on a linear
/// trajectory, and the two routes to `A(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommutatorConfig {
    pub potential: Descriptor,
    pub s: f64,
    pub t0: f64,
    pub dt: f64,
    pub samples: usize,
    pub residual_tolerance: f64,
    /// Minimum residual reduction when `dt` shrinks by four.
    pub min_reduction: f64,
    pub a_powers: Vec<f64>,
    pub a_grid: GridConfig,
    pub a_tolerance: f64,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        Self {
            potential: Descriptor::Zero,
            s: 1.0,
            t0: 1.0,
            dt: 0.01,
            samples: 9,
            residual_tolerance: 1e-5,
            min_reduction: 8.0,
            a_powers: vec![0.5],
            a_grid: GridConfig { half_width: 80.0, points: 4096 },
            a_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Descriptor,
    pub grid: GridConfig,
    pub scatter: ScatterConfig,
    pub spectral: SpectralConfig,
    pub norm_equiv: NormEquivConfig,
    pub commutator: CommutatorConfig,
    pub decay: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: Descriptor::GaussianBarrier { v0: 1.0, sigma: 1.0 },
            grid: GridConfig::default(),
            scatter: ScatterConfig::default(),
            spectral: SpectralConfig::default(),
            norm_equiv: NormEquivConfig::default(),
            commutator: CommutatorConfig::default(),
            decay: ExperimentConfig::default(),
        }
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|span| text[..span.start.min(text.len())].lines().count().max(1)).unwrap_or(1);
            Error::Parse { line, message: e.message().to_string() }
        })?;
        config.validate()?;
        Ok(config)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        self.grid.build()?;
        positive("scatter.tau_max", self.scatter.tau_max)?;
        positive("scatter.unitarity_tolerance", self.scatter.unitarity_tolerance)?;
        if self.scatter.tau_count < 2 {
            return Err(Error::InvalidParameter("scatter.tau_count must be at least 2".into()));
        }
        positive("spectral.plancherel_tolerance", self.spectral.plancherel_tolerance)?;
        positive("spectral.kato_tolerance", self.spectral.kato_tolerance)?;
        positive("spectral.homomorphism_tolerance", self.spectral.homomorphism_tolerance)?;
        for &s in &self.spectral.powers {
            positive("spectral.powers", s)?;
        }
        for &tau in &self.spectral.resolvent_taus {
            positive("spectral.resolvent_taus", tau)?;
        }
        let ne = &self.norm_equiv;
        ne.companion.validate()?;
        for &s in &ne.powers {
            if !(0.0..0.5).contains(&s) {
                return Err(Error::InvalidParameter(format!("norm_equiv.powers must lie in [0, 1/2), got {s}")));
            }
        }
        if !(ne.band >= 1.0 && ne.band.is_finite()) {
            return Err(Error::InvalidParameter(format!("norm_equiv.band must be >= 1, got {}", ne.band)));
        }
        if !(0..=30).contains(&ne.max_offset) {
            return Err(Error::InvalidParameter(format!("norm_equiv.max_offset out of range: {}", ne.max_offset)));
        }
        positive("norm_equiv.envelope_bound", ne.envelope_bound)?;
        if !(ne.envelope_slack >= 0.0 && ne.envelope_slack.is_finite()) {
            return Err(Error::InvalidParameter("norm_equiv.envelope_slack must be >= 0".into()));
        }
        let c = &self.commutator;
        c.potential.validate()?;
        c.a_grid.build()?;
        positive("commutator.s", c.s)?;
        positive("commutator.dt", c.dt)?;
        positive("commutator.residual_tolerance", c.residual_tolerance)?;
        positive("commutator.min_reduction", c.min_reduction)?;
        positive("commutator.a_tolerance", c.a_tolerance)?;
        if !(c.t0 >= 1.0 && c.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("commutator.t0 must be >= 1, got {}", c.t0)));
        }
        if c.samples < 5 {
            return Err(Error::InvalidParameter("commutator.samples must be at least 5".into()));
        }
        for &s in &c.a_powers {
            if !(s > 0.0 && s < 2.0) {
                return Err(Error::InvalidParameter(format!("commutator.a_powers must lie in (0, 2), got {s}")));
            }
        }
        self.decay.validate()
    }

    /// Multiplies every point count by `k` and divides every time step by `k`.
    pub fn scaled(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("resolution scale must be at least 1".into()));
        }
        let mut out = self.clone();
        let kf = k as f64;
        out.grid.points *= k;
        out.commutator.a_grid.points *= k;
        out.commutator.dt /= kf;
        out.commutator.samples = (out.commutator.samples - 1) * k + 1;
        out.decay.points *= k;
        out.decay.dt /= kf;
        out.validate()?;
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
