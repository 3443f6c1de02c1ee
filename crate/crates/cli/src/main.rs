//! `sfwm`: correlation, filtering and photon-counting pipelines.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_override, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sfwm", version, about = "Biphoton correlation, filtering and photon-counting pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value config file with optional [section] headers
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Overrides run.seed
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Overrides one config key; repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Velocity-averaged G_SI, its correlation time and bandwidth
    Correlation {
        /// Overrides cell.temperature_k
        #[arg(long, value_name = "KELVIN")]
        temperature: Option<f64>,
    },
    /// Filter responses and detector-plane correlations per absorption strength
    Beats {
        /// Overrides filter.alphas
        #[arg(long, value_name = "A,B,...")]
        alpha: Option<String>,
    },
    /// Simulated photon counting, or an OD sweep with sweep.enabled
    Montecarlo {
        /// Same as --set sweep.enabled=true
        #[arg(long)]
        sweep: bool,
    },
    /// Power-law and through-origin fits of an OD scan CSV
    Fit {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Counting estimators over an event file
    Analyze {
        #[arg(long, value_name = "PATH")]
        events: PathBuf,
        /// Overrides analysis.duration_s
        #[arg(long, value_name = "SECONDS")]
        duration: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let mut push = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(seed) = cli.seed {
        push("run.seed", seed.to_string());
    }
    match &cli.command {
        Command::Correlation { temperature: Some(t) } => push("cell.temperature_k", t.to_string()),
        Command::Beats { alpha: Some(a) } => push("filter.alphas", a.clone()),
        Command::Montecarlo { sweep: true } => push("sweep.enabled", "true".into()),
        Command::Analyze { duration: Some(d), .. } => push("analysis.duration_s", d.to_string()),
        _ => {}
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Correlation { .. } => commands::correlation(&cfg, &cli.out),
        Command::Beats { .. } => commands::beats(&cfg, &cli.out),
        Command::Montecarlo { .. } => commands::montecarlo(&cfg, &cli.out),
        Command::Fit { input } => commands::fit(&cfg, &cli.out, input),
        Command::Analyze { events, .. } => commands::analyze(&cfg, &cli.out, events),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sfwm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
