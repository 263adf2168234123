use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use ssf_lab::runner::{run, ExperimentConfig, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    TraceCheck,
    DoiCheck,
    RmCert,
    DiracSchatten,
    BirmanKrein,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::TraceCheck => Subcommand::TraceCheck,
            Command::DoiCheck => Subcommand::DoiCheck,
            Command::RmCert => Subcommand::RmCert,
            Command::DiracSchatten => Subcommand::DiracSchatten,
            Command::BirmanKrein => Subcommand::BirmanKrein,
            Command::All => Subcommand::All,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

/// Runs the spectral-shift verification suites and writes a report.
///
/// Values given on the command line override the configuration file.
/// The exit status is 0 exactly when every check passes.
#[derive(Debug, Parser)]
#[command(name = "ssf-lab", version)]
struct Cli {
    /// Suite to run; falls back to the config file, then to `all`.
    command: Option<Command>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    jobs: Option<i64>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).map_err(anyhow::Error::msg).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(c) = cli.command {
        config.subcommand = c.into();
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(j) = cli.jobs {
        config.jobs = Some(j);
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<bool> {
    let config = load(cli)?;
    let report = match run(&config) {
        Ok(r) => r,
        Err(errors) => {
            let lines: Vec<String> = errors.iter().map(|e| format!("  {e}")).collect();
            bail!("invalid configuration:\n{}", lines.join("\n"));
        }
    };
    let body = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    eprint!("{}", report.summary());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
