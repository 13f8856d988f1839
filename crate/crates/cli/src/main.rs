use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

mod commands;
mod output;
mod verify;

use output::{emit, Document, Format};

/// Tree-code analysis and coded compressed sensing simulation.
#[derive(Parser, Debug)]
#[command(name = "ccs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON parameter file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config file
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of Monte Carlo trials, overriding the config file
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact and approximate expected erroneous survivors per stage
    Analyze(commands::AnalyzeArgs),
    /// Column reduction ratio per (K, slot)
    ReductionCurve(commands::ReductionArgs),
    /// Run a Monte Carlo experiment and write its report
    Simulate(commands::SimulateArgs),
    /// Run a built-in property suite
    Verify(verify::VerifyArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input or a guard violation.
    Invalid(String),
    /// A verification check failed.
    VerifyFailed,
    /// The run finished but more than half of its trials blew up.
    Degraded(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Invalid(_) => 2,
            CliError::Degraded(_) => 3,
        }
    }
}

impl From<ccs_core::Error> for CliError {
    fn from(e: ccs_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

pub fn metadata(command: &str, seed: Option<u64>) -> serde_json::Value {
    json!({
        "command": command,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Parses the `--config` file, or returns `None` when none was given.
pub fn load_config<T: DeserializeOwned>(path: Option<&Path>) -> Result<Option<T>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn write(doc: &Document, common: &Common) -> Result<(), CliError> {
    emit(&doc.render(common.format)?, common.out.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match cli.command {
        Command::Analyze(args) => write(&commands::analyze(&args, common)?, common),
        Command::ReductionCurve(args) => write(&commands::reduction_curve(&args, common)?, common),
        Command::Simulate(args) => {
            let (doc, degraded) = commands::simulate(&args, common)?;
            write(&doc, common)?;
            match degraded {
                Some(msg) => Err(CliError::Degraded(msg)),
                None => Ok(()),
            }
        }
        Command::Verify(args) => {
            let (doc, passed) = verify::run(&args, common)?;
            write(&doc, common)?;
            if passed {
                Ok(())
            } else {
                Err(CliError::VerifyFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Invalid(msg) => eprintln!("error: {msg}"),
                CliError::VerifyFailed => eprintln!("verification failed"),
                CliError::Degraded(msg) => eprintln!("degraded run: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
