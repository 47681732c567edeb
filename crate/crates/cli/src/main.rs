//! `disperse`: config-driven runner for the scattering, spectral, norm
//! equivalence, commutator and decay experiments.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
//! config errors, 3 when a computation aborts.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use disperse::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Subcommand {
    Scatter,
    SpectralCheck,
    NormEquiv,
    CommutatorCheck,
    Decay,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::Scatter => "scatter",
            Subcommand::SpectralCheck => "spectral-check",
            Subcommand::NormEquiv => "norm-equiv",
            Subcommand::CommutatorCheck => "commutator-check",
            Subcommand::Decay => "decay",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "disperse", version, about = "Spectral scattering and NLS decay experiments")]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables, summary.json and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Multiplies every point count and divides every time step.
    #[arg(long, default_value_t = 1)]
    resolution_scale: usize,
}

fn load(args: &Args) -> Result<RunConfig, String> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            text.parse::<RunConfig>().map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    config.scaled(args.resolution_scale).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let result = match args.subcommand {
        Subcommand::Scatter => commands::scatter(&config),
        Subcommand::SpectralCheck => commands::spectral_check(&config),
        Subcommand::NormEquiv => commands::norm_equiv(&config),
        Subcommand::CommutatorCheck => commands::commutator_check(&config),
        Subcommand::Decay => commands::decay(&config),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} aborted: {e}", args.subcommand.name());
            return ExitCode::from(3);
        }
    };
    let resolved = config.to_toml();
    match report::write_outputs(&args.out, args.subcommand.name(), &resolved, &report, start.elapsed()) {
        Ok(path) => eprintln!("manifest: {}", path.display()),
        Err(e) => {
            eprintln!("error: cannot write outputs to {}: {e}", args.out.display());
            return ExitCode::from(3);
        }
    }
    for check in &report.checks {
        println!("{}", check.line());
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
