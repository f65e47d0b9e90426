mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::ScenarioConfig;
use output::RunRecord;

#[derive(Parser, Debug)]
#[command(name = "qspread", version, about = "Bid-ask spread models: symbolic derivation, moments, laws and pricing")]
struct Cli {
    /// TOML scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the Monte Carlo sampler.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory, overriding `[output].dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Built-in evolution for `derive`.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Classical,
    Extended,
    Spread,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Print the generator coefficients of an evolution.
    Derive,
    /// Tabulate analytic, lattice and Monte Carlo central moments.
    Moments,
    /// Tabulate the terminal law of the spread process.
    Density,
    /// Price a payoff and test it for arbitrage.
    Price,
    /// Implied normal volatility across strikes.
    Smile,
    /// Gaussian-model variance against the rotation angle.
    Skew,
    /// Run the internal consistency checks.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Derive => "derive",
            Command::Moments => "moments",
            Command::Density => "density",
            Command::Price => "price",
            Command::Smile => "smile",
            Command::Skew => "skew",
            Command::Validate => "validate",
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let outcome = match cli.command {
        Command::Derive => commands::derive(&cfg, cli.preset)?,
        Command::Moments => commands::moments(&cfg, &dir, cli.seed)?,
        Command::Density => commands::density(&cfg, &dir)?,
        Command::Price => commands::price(&cfg, &dir)?,
        Command::Smile => commands::smile(&cfg, &dir)?,
        Command::Skew => commands::skew(&cfg, &dir)?,
        Command::Validate => commands::validate(&cfg, &dir, cli.seed)?,
    };
    let record = RunRecord {
        command: cli.command.name().to_string(),
        config_digest: cfg.digest(),
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION"),
        outputs: outcome.outputs,
        passed: outcome.passed,
        summary: outcome.summary,
    };
    let path = record.write(&dir)?;
    eprintln!("{}: {} (record {})", record.command, record.summary, path.display());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
