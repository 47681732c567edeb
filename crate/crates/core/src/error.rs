use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: field has {found} samples, grid has {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("potential not admissible on this grid: tail mass {tail_mass:.3e} exceeds {tolerance:.1e}")]
    NotAdmissible { tail_mass: f64, tolerance: f64 },
    #[error("unsupported norm exponent p = {0}")]
    UnsupportedExponent(f64),
    #[error("Jost integration defect {defect:.3e} above tolerance {tolerance:.1e} at momentum {momentum}")]
    JostDefect { defect: f64, tolerance: f64, momentum: String },
    #[error("Wronskian vanishes at tau = {tau:.6e} (|w| = {magnitude:.3e})")]
    VanishingWronskian { tau: f64, magnitude: f64 },
    #[error("unitarity defect {defect:.3e} above tolerance {tolerance:.1e} at tau = {tau:.6e}")]
    Unitarity { defect: f64, tolerance: f64, tau: f64 },
    #[error("extrapolation to tau = 0 is unstable: stencils disagree by {0:.3e}")]
    Extrapolation(f64),
    #[error("bound state detected near energy {energy:.6}")]
    BoundState { energy: f64 },
    #[error("distorted basis not certified: Plancherel defect {defect:.3e} above {tolerance:.1e}")]
    Uncertified { defect: f64, tolerance: f64 },
    #[error("multiplier is not resolved on the spectral lattice: {0}")]
    Unresolved(String),
    #[error("quadrature tail estimate {estimate:.3e} above tolerance {tolerance:.1e}")]
    QuadratureTail { estimate: f64, tolerance: f64 },
    #[error("banded solve failed: {0}")]
    Solver(String),
    #[error("support condition violated: {0}")]
    Support(String),
    #[error("trajectory unsuitable: {0}")]
    Trajectory(String),
    #[error("blow-up guard tripped at t = {t:.4}: sup|u| = {sup:.3e} exceeds {limit:.3e}")]
    BlowUp { t: f64, sup: f64, limit: f64 },
    #[error("wave packet reached the boundary layer at t = {t:.4} (outer mass fraction {fraction:.3e})")]
    BoundaryContact { t: f64, fraction: f64 },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
