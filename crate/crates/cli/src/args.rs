use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geon_core::VacuumKind;

#[derive(Parser, Debug)]
#[command(name = "geon", version, about = "Detector response outside a Schwarzschild black hole and its RP3 geon")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Numerics knobs shared by every subcommand. Unset values fall back to the
/// config file, then to the built-in defaults.
#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Flat key = value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for persisted mode tables (also UDW_CACHE_DIR)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Highest angular momentum kept
    #[arg(long, global = true)]
    pub l_max: Option<u32>,
    /// Lowest tabulated Killing frequency
    #[arg(long, global = true)]
    pub omega_min: Option<f64>,
    /// Highest tabulated Killing frequency
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,
    /// Frequency nodes per table
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Relative tolerance of the radial integrator
    #[arg(long, global = true)]
    pub ode_rtol: Option<f64>,
    /// Relative tolerance of the frequency quadrature
    #[arg(long, global = true)]
    pub quad_rtol: Option<f64>,
    /// Extrapolate integrands below the lowest tabulated frequency
    #[arg(long, global = true)]
    pub ir_closure: Option<bool>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one radial mode and print its scattering data
    Modes {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        omega: f64,
        #[arg(long, value_parser = radius)]
        r: Option<f64>,
    },
    /// Build or inspect cached mode tables
    Table {
        #[command(subcommand)]
        action: TableAction,
    },
    /// Response functions F_BH, F_J for Gaussian switching
    Response(ResponseArgs),
    /// Transition rates for sudden switching
    Rate(RateArgs),
}

#[derive(Subcommand, Debug)]
pub enum TableAction {
    Build {
        /// Detector radii, comma separated
        #[arg(long, value_delimiter = ',', value_parser = radius)]
        r: Vec<f64>,
        /// Rebuild even when a cached table exists
        #[arg(long)]
        force: bool,
    },
    Inspect {
        #[arg(long, value_parser = radius)]
        r: Option<f64>,
        /// Rebuild an unreadable cache file instead of failing
        #[arg(long)]
        force: bool,
        /// Also write every entry as text
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    #[value(name = "omega")]
    Omega,
    /// Gap in units of the local temperature
    #[value(name = "omega_t")]
    OmegaT,
    #[value(name = "r")]
    Radius,
    #[value(name = "sigma")]
    Sigma,
    #[value(name = "tau0")]
    Tau0,
}

impl SweepVar {
    pub fn label(self) -> &'static str {
        match self {
            SweepVar::Omega => "Omega",
            SweepVar::OmegaT => "Omega_over_T",
            SweepVar::Radius => "r",
            SweepVar::Sigma => "sigma",
            SweepVar::Tau0 => "tau0",
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// Parameter to sweep
    #[arg(long)]
    pub sweep: Option<SweepVar>,
    /// Explicit sweep values, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["from", "to", "steps"])]
    pub values: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Space the sweep values logarithmically
    #[arg(long)]
    pub log: bool,
}

#[derive(Args, Debug, Default)]
pub struct PointArgs {
    /// Vacuum states, comma separated: HH, Unruh, Boulware
    #[arg(long, value_delimiter = ',')]
    pub vacuum: Vec<VacuumKind>,
    #[arg(long, value_parser = radius)]
    pub r: Option<f64>,
    /// Detector gap
    #[arg(long, allow_hyphen_values = true, conflicts_with = "omega_t")]
    pub omega: Option<f64>,
    /// Detector gap in units of the local temperature
    #[arg(long, allow_hyphen_values = true)]
    pub omega_t: Option<f64>,
    /// Centre of the switching (response) or switch-on time (rate)
    #[arg(long, allow_hyphen_values = true)]
    pub tau0: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Write CSV here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Leave out the generation-time comment line
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Args, Debug, Default)]
pub struct ResponseArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Switching width
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Largest |tau0|/sigma accepted
    #[arg(long)]
    pub tau0_budget: Option<f64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Default)]
pub struct RateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Upper bound on the half-width of the principal-value window
    #[arg(long)]
    pub pv_window: Option<f64>,
    /// Allowed window-halving change of the principal value
    #[arg(long)]
    pub pv_tol: Option<f64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn radius(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r > 1.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(format!("radius {r} must lie outside the horizon (r > 1)"))
    }
}
