//! `mzsim`: run nested-interferometer scenarios and `.mzi` circuits.
//!
//! Exit codes: 0 success, 1 circuit diagnostics, 2 configuration errors.

mod output;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mzsim::circuit::{parse_bytes, serialize, validate, Scenario};

use crate::run::{execute, Failure};

#[derive(Parser, Debug)]
#[command(
    name = "mzsim",
    version,
    about = "Nested Mach-Zehnder interferometer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a circuit with the quantum and/or classical engine.
    Run(RunArgs),
    /// Parse and validate a .mzi file, printing diagnostics.
    Check { file: PathBuf },
    /// Print the canonical form of a .mzi file.
    Fmt { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Quantum,
    Classical,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    DeltaI,
    ITotal,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Exact,
    Paraxial,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Built-in scenario: a (φ=π), b (φ=0) or c (φ=0, lower arm blocked).
    #[arg(long, conflicts_with = "circuit")]
    pub scenario: Option<Scenario>,
    /// Circuit file in .mzi format.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Override the circuit phase φ (accepts expressions such as pi/2).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Both)]
    pub engine: Engine,
    #[arg(long, value_enum, default_value_t = Witness::Both)]
    pub witness: Witness,
    /// Classical field model.
    #[arg(long, value_enum, default_value_t = VariantArg::Exact)]
    pub variant: VariantArg,
    /// Record length in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 4096.0)]
    pub rate: f64,
    /// Number of transverse samples (odd).
    #[arg(long, default_value_t = 513)]
    pub ny: usize,
    /// Transverse half-width in beam waists.
    #[arg(long, default_value_t = 6.0)]
    pub ylim: f64,
    /// Override every mirror's deflection amplitude (waist units).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Peak integration half-width in bins.
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    /// Output directory (defaults to the current directory when --format is given).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats; repeatable. Defaults to csv and json when --out is given.
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
    /// Logarithmic ordinate in SVG plots.
    #[arg(long)]
    pub log: bool,
}

fn read(file: &PathBuf) -> Result<Vec<u8>, ExitCode> {
    std::fs::read(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match execute(&args) {
            Ok(summary) => {
                print!("{summary}");
                ExitCode::SUCCESS
            }
            Err(Failure::Diagnostics(lines)) => {
                for l in lines {
                    eprintln!("{l}");
                }
                ExitCode::from(1)
            }
            Err(Failure::Config(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Command::Check { file } => {
            let bytes = match read(&file) {
                Ok(b) => b,
                Err(code) => return code,
            };
            match parse_bytes(&bytes) {
                Ok(c) => {
                    for d in validate(&c) {
                        eprintln!("{}:{d}", file.display());
                    }
                    println!(
                        "ok: {} beam splitters, {} mirrors, {} phase shifters, {} blocks, {} discards",
                        c.count_beam_splitters(),
                        c.mirror_count(),
                        c.count_phase_shifts(),
                        c.count_blocks(),
                        c.count_discards()
                    );
                    ExitCode::SUCCESS
                }
                Err(diags) => {
                    for d in diags {
                        eprintln!("{}:{d}", file.display());
                    }
                    ExitCode::from(1)
                }
            }
        }
        Command::Fmt { file } => {
            let bytes = match read(&file) {
                Ok(b) => b,
                Err(code) => return code,
            };
            match parse_bytes(&bytes) {
                Ok(c) => {
                    print!("{}", serialize(&c));
                    ExitCode::SUCCESS
                }
                Err(diags) => {
                    for d in diags {
                        eprintln!("{}:{d}", file.display());
                    }
                    ExitCode::from(1)
                }
            }
        }
    }
}
