use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gyro::{commands, exit, scenario, Result};

/// Frame-dragging gyrometer design and noise-budget tool.
///
/// Exit codes: 0 success, 2 validation error, 3 domain or stability error,
/// 4 simulation abort. Set GYRO_CONSTANTS to replace the built-in
/// constants file.
#[derive(Debug, Parser)]
#[command(name = "gyro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: the scenario's [output] directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Target relative error for measurement-time planning.
    #[arg(long)]
    target_rel_err: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sagnac, frame-dragging, geodetic and Thomas phases.
    PhaseBudget(Common),
    /// Noise density versus temperature, with and without fluid losses.
    NoiseSweep(Common),
    /// Measurement time, position resolution and orientation tolerance.
    Plan(Common),
    /// Ringdown simulation and Monte Carlo sensitivity estimate.
    Simulate(Common),
    /// Design search over a box of free parameters.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Design-space TOML file.
        #[arg(long)]
        design: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::PhaseBudget(c) | Command::NoiseSweep(c) | Command::Plan(c) | Command::Simulate(c) => c,
        Command::Optimize { common, .. } => common,
    };
    let s = scenario::load(&common.scenario)?;
    let out = s.output_dir(common.out.as_deref());
    let report = match &cli.command {
        Command::PhaseBudget(_) => commands::phase_budget_report(&s)?,
        Command::NoiseSweep(_) => commands::noise_sweep(&s, &out)?.report,
        Command::Plan(_) => commands::plan(&s, common.target_rel_err)?,
        Command::Simulate(_) => commands::simulate(&s, common.seed, &out)?,
        Command::Optimize { design, .. } => commands::optimize(&s, design, common.seed, &out)?.report,
    };
    print!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
