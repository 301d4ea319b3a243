//! Command-line front end for the pvpump simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use config::{ConfigFile, Preset};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure at {0}")]
    Solver(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for bad input or I/O, 2 when the numerics fail mid-run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Solver(_) => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<pvpump_core::sim::SimError> for CliError {
    fn from(e: pvpump_core::sim::SimError) -> Self {
        use pvpump_core::sim::SimError;
        match e {
            SimError::InvalidScenario(msg) => CliError::Config(msg),
            other => CliError::Solver(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pvpump", version, about = "Solar-tracked PV water-pumping simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write the full trace as CSV.
    Simulate(SimulateArgs),
    /// Sweep the panel I-V curve at one operating point.
    IvSweep(IvSweepArgs),
    /// Run one scenario under every MPPT controller and compare them per cycle.
    MpptCompare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML; keys left out take the built-in defaults.
    #[arg(long)]
    pub config: PathBuf,
    /// Trace CSV path; the resolved config is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep every n-th record.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub decimate: u64,
    /// Threshold preset, replacing the one named in the config.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args)]
pub struct IvSweepArgs {
    /// Plane-of-array irradiance (W/m²).
    #[arg(long, default_value_t = 1000.0)]
    pub irradiance: f64,
    /// Cell temperature (°C).
    #[arg(long, default_value_t = 25.0)]
    pub temp_c: f64,
    #[arg(long, default_value_t = 500)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Take the panel parameters from this scenario instead of the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for the controller runs.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args, &mut stdout),
        Command::IvSweep(args) => commands::iv_sweep(&args, &mut stdout),
        Command::MpptCompare(args) => commands::mppt_compare(&args, &mut stdout),
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pvpump: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvpump_core::pv_model::PvError;
    use pvpump_core::sim::SimError;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let solver = SimError::Solver {
            step: 12,
            source: PvError::NoConvergence { voltage: 3.0, residual: 1.0 },
        };
        let e = CliError::from(solver);
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("step 12"));
        assert_eq!(CliError::from(SimError::InvalidScenario("dt".into())).exit_code(), 1);
    }
}
