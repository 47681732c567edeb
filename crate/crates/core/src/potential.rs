//! Catalog of real potentials and their sampled form on a grid.
//!
//! Descriptors have a compact text form, e.g. `gaussian_barrier(v0=1, sigma=1)`,
//! used in configs, manifests and CSV metadata.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Default bound on the `<x>^3`-weighted tail mass outside `|x| < L - 4 sigma_eff`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Relative level below which a potential is treated as exactly zero.
const NEGLIGIBLE: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Descriptor {
    Zero,
    /// `v0 exp(-x^2 / (2 sigma^2))`
    GaussianBarrier { v0: f64, sigma: f64 },
    /// `-2 kappa^2 sech^2(kappa x)`; reflectionless, one bound state at `-kappa^2`.
    SolitonWell { kappa: f64 },
    /// `v0` on `|x| <= a`, zero outside. Not smooth; used as an oracle only.
    SquareBarrier { v0: f64, a: f64 },
}

impl Descriptor {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Descriptor::Zero => 0.0,
            Descriptor::GaussianBarrier { v0, sigma } => v0 * (-x * x / (2.0 * sigma * sigma)).exp(),
            Descriptor::SolitonWell { kappa } => {
                let c = (kappa * x).cosh();
                -2.0 * kappa * kappa / (c * c)
            }
            Descriptor::SquareBarrier { v0, a } => {
                if x.abs() <= a {
                    v0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed-form `V'(x)` (zero away from the jumps for the square barrier).
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Descriptor::Zero | Descriptor::SquareBarrier { .. } => 0.0,
            Descriptor::GaussianBarrier { sigma, .. } => -x / (sigma * sigma) * self.value(x),
            Descriptor::SolitonWell { kappa } => {
                let u = kappa * x;
                4.0 * kappa.powi(3) * u.tanh() / u.cosh().powi(2)
            }
        }
    }

    /// Interval outside which `|V|` is below `1e-17` of its peak, or `None`
    /// for the zero potential.
    pub fn support(&self) -> Option<(f64, f64)> {
        let reach = match *self {
            Descriptor::Zero => return None,
            Descriptor::GaussianBarrier { v0, sigma } => {
                if v0 == 0.0 {
                    return None;
                }
                sigma * (-2.0 * NEGLIGIBLE.ln()).sqrt()
            }
            // 2k^2 sech^2(kx) <= 8 k^2 e^{-2k|x|}
            Descriptor::SolitonWell { kappa } => (4.0 / NEGLIGIBLE).ln() / (2.0 * kappa),
            Descriptor::SquareBarrier { v0, a } => {
                if v0 == 0.0 {
                    return None;
                }
                a
            }
        };
        Some((-reach, reach))
    }

    /// Points where `V` jumps; integrators must not step across them.
    pub fn jumps(&self) -> Vec<f64> {
        match *self {
            Descriptor::SquareBarrier { v0, a } if v0 != 0.0 => vec![-a, a],
            _ => Vec::new(),
        }
    }

    /// Length scale used by the truncation-admissibility gate.
    pub fn effective_width(&self) -> f64 {
        match *self {
            Descriptor::Zero => 0.0,
            Descriptor::GaussianBarrier { sigma, .. } => sigma,
            Descriptor::SolitonWell { kappa } => 1.0 / kappa,
            Descriptor::SquareBarrier { a, .. } => a,
        }
    }

    pub fn peak(&self) -> f64 {
        match *self {
            Descriptor::Zero => 0.0,
            Descriptor::GaussianBarrier { v0, .. } | Descriptor::SquareBarrier { v0, .. } => v0.abs(),
            Descriptor::SolitonWell { kappa } => 2.0 * kappa * kappa,
        }
    }

    /// Largest value of `-V`, zero if `V >= 0`.
    pub fn well_depth(&self) -> f64 {
        match *self {
            Descriptor::Zero => 0.0,
            Descriptor::GaussianBarrier { v0, .. } | Descriptor::SquareBarrier { v0, .. } => (-v0).max(0.0),
            Descriptor::SolitonWell { kappa } => 2.0 * kappa * kappa,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        let positive = |name: &str, v: f64| {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            Descriptor::Zero => Ok(()),
            Descriptor::GaussianBarrier { v0, sigma } => {
                finite("v0", v0)?;
                positive("sigma", sigma)
            }
            Descriptor::SolitonWell { kappa } => positive("kappa", kappa),
            Descriptor::SquareBarrier { v0, a } => {
                finite("v0", v0)?;
                positive("a", a)
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Descriptor::Zero => "zero",
            Descriptor::GaussianBarrier { .. } => "gaussian_barrier",
            Descriptor::SolitonWell { .. } => "soliton_well",
            Descriptor::SquareBarrier { .. } => "square_barrier",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Descriptor::Zero => write!(f, "zero"),
            Descriptor::GaussianBarrier { v0, sigma } => {
                write!(f, "{}(v0={v0:?}, sigma={sigma:?})", self.name())
            }
            Descriptor::SolitonWell { kappa } => write!(f, "{}(kappa={kappa:?})", self.name()),
            Descriptor::SquareBarrier { v0, a } => write!(f, "{}(v0={v0:?}, a={a:?})", self.name()),
        }
    }
}

fn parse_error(message: impl Into<String>) -> Error {
    Error::Parse { line: 1, message: message.into() }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, body) = match text.find('(') {
            Some(open) => {
                let rest = &text[open + 1..];
                let body = rest
                    .strip_suffix(')')
                    .ok_or_else(|| parse_error("missing closing parenthesis"))?;
                (text[..open].trim(), Some(body))
            }
            None => (text, None),
        };
        let mut params: Vec<(&str, f64)> = Vec::new();
        if let Some(body) = body {
            if !body.trim().is_empty() {
                for item in body.split(',') {
                    let (key, value) = item
                        .split_once('=')
                        .ok_or_else(|| parse_error(format!("expected key=value, found {:?}", item.trim())))?;
                    let key = key.trim();
                    let value: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| parse_error(format!("bad number for {key}: {:?}", value.trim())))?;
                    if params.iter().any(|(k, _)| *k == key) {
                        return Err(parse_error(format!("duplicate parameter {key}")));
                    }
                    params.push((key, value));
                }
            }
        }
        let mut take = |key: &str| -> Result<f64> {
            let idx = params
                .iter()
                .position(|(k, _)| *k == key)
                .ok_or_else(|| parse_error(format!("{name} needs parameter {key}")))?;
            Ok(params.remove(idx).1)
        };
        let descriptor = match name {
            "zero" => Descriptor::Zero,
            "gaussian_barrier" => Descriptor::GaussianBarrier { v0: take("v0")?, sigma: take("sigma")? },
            "soliton_well" => Descriptor::SolitonWell { kappa: take("kappa")? },
            "square_barrier" => Descriptor::SquareBarrier { v0: take("v0")?, a: take("a")? },
            other => return Err(parse_error(format!("unknown potential {other:?}"))),
        };
        if let Some((key, _)) = params.first() {
            return Err(parse_error(format!("unexpected parameter {key} for {name}")));
        }
        descriptor.validate()?;
        Ok(descriptor)
    }
}

impl serde::Serialize for Descriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Descriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A descriptor sampled on a grid together with its weighted `L^{1,s}` norms.
#[derive(Debug, Clone)]
pub struct Potential {
    pub descriptor: Descriptor,
    pub grid: SpatialGrid,
    pub samples: Vec<f64>,
    /// `||<x>^s V||_{L^1}` for `s = 1, 2, 3`.
    pub weighted_l1: [f64; 3],
    pub tail_mass: f64,
}

/// Samples `descriptor` on `grid` and checks truncation admissibility with
/// the default tail tolerance.
pub fn sample_potential(descriptor: Descriptor, grid: &SpatialGrid) -> Result<Potential> {
    Potential::with_tolerance(descriptor, grid, TAIL_TOLERANCE)
}

impl Potential {
    pub fn with_tolerance(descriptor: Descriptor, grid: &SpatialGrid, tolerance: f64) -> Result<Self> {
        descriptor.validate()?;
        let samples = grid.sample_real(|x| descriptor.value(x));
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("potential samples are not finite".into()));
        }
        let cutoff = grid.half_width() - 4.0 * descriptor.effective_width();
        let japanese = |x: f64| (1.0 + x * x).sqrt();
        let tail_mass = grid.integrate(
            &(0..grid.len())
                .map(|i| {
                    let x = grid.x(i);
                    if x.abs() > cutoff {
                        japanese(x).powi(3) * samples[i].abs()
                    } else {
                        0.0
                    }
                })
                .collect::<Vec<_>>(),
        );
        if tail_mass >= tolerance || cutoff <= 0.0 && !descriptor.is_zero() {
            return Err(Error::NotAdmissible { tail_mass, tolerance });
        }
        let mut weighted_l1 = [0.0; 3];
        for (s, slot) in weighted_l1.iter_mut().enumerate() {
            let weights: Vec<f64> = (0..grid.len())
                .map(|i| japanese(grid.x(i)).powi(s as i32 + 1) * samples[i].abs())
                .collect();
            *slot = grid.integrate(&weights);
        }
        Ok(Self { descriptor, grid: grid.clone(), samples, weighted_l1, tail_mass })
    }

    pub fn zero(grid: &SpatialGrid) -> Self {
        Self {
            descriptor: Descriptor::Zero,
            grid: grid.clone(),
            samples: vec![0.0; grid.len()],
            weighted_l1: [0.0; 3],
            tail_mass: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.descriptor.is_zero()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.descriptor.value(x)
    }

    /// Support window clipped to the grid.
    pub fn window(&self) -> Option<(f64, f64)> {
        let (a, b) = self.descriptor.support()?;
        let lo = self.grid.x(0);
        let hi = self.grid.x(self.grid.len() - 1);
        Some((a.max(lo), b.min(hi)))
    }

    /// `V'` on the grid by spectral differentiation of the samples.
    pub fn derivative_samples(&self) -> Vec<f64> {
        let complex: Vec<_> = self.samples.iter().map(|&v| crate::C64::new(v, 0.0)).collect();
        self.grid.derivative(&complex).into_iter().map(|z| z.re).collect()
    }

    /// `V_1 = 2V + xV'`, the potential produced by commuting with `x d/dx`.
    pub fn virial_samples(&self) -> Vec<f64> {
        let dv = self.derivative_samples();
        (0..self.grid.len())
            .map(|i| 2.0 * self.samples[i] + self.grid.x(i) * dv[i])
            .collect()
    }
}
