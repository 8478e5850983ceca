//! `spinprobe`: batch runs of the light-scattering spin-readout simulator.
//!
//! Settings come from a TOML run config; `--out`, `--seed` and `--format`
//! override the matching config fields (`output.dir`, `experiment.seed`,
//! `output.format`), and built-in defaults fill whatever is left.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Outcome};
use config::{ConfigError, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "spinprobe", version, about = "Spin-correlation readout by off-resonant light scattering")]
struct Cli {
    /// Run config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides output.dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed; overrides experiment.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table format; overrides output.format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Photon counts N and their ground-state estimate over a theta scan.
    EmissionScan,
    /// Relative error of the ground-state estimate against emitted photons.
    ErrorCurve,
    /// Simulated homodyne readout and site-resolved reconstruction.
    Reconstruct,
    /// Stabilizer check of a small cluster state.
    VerifyCluster,
    /// Momentum grid and detector settings for a lattice.
    PlanGeometry,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EmissionScan => "emission-scan",
            Command::ErrorCurve => "error-curve",
            Command::Reconstruct => "reconstruct",
            Command::VerifyCluster => "verify-cluster",
            Command::PlanGeometry => "plan-geometry",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = Some(out.display().to_string());
    }
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = Some(seed);
    }
    if let Some(format) = cli.format {
        cfg.output.format = Some(format);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Option<CliError>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::Invalid { path: "--threads".into(), reason: "must be at least 1".into() }.into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    let mut cfg = load_config(cli)?;
    let Outcome { files, summary, failure } = match cli.command {
        Command::EmissionScan => commands::emission_scan(&mut cfg),
        Command::ErrorCurve => commands::error_curve(&mut cfg),
        Command::Reconstruct => commands::reconstruct(&mut cfg),
        Command::VerifyCluster => commands::verify(&mut cfg),
        Command::PlanGeometry => commands::plan_geometry(&mut cfg),
    }?;
    for path in files.write()? {
        println!("wrote {}", path.display());
    }
    for line in summary {
        println!("{line}");
    }
    Ok(failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|f| f.map_or(Ok(()), Err));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match &e {
                CliError::Config(_) => "config error",
                CliError::Coverage(_) => "coverage error",
                CliError::Verification(_) => "verification",
                _ => "error",
            };
            eprintln!("spinprobe {}: {kind}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
