//! `ur`: build SU(N) bases, verify uncertainty relations, scan variance
//! regions and compare bounds.
//!
//! Exit codes: 0 success, 1 relation violated (or a numerical failure while
//! evaluating one), 2 usage error.

mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use bloch_uncertainty::RelationId;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ur", version, about = "Bloch-vector variances and uncertainty relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the generalized Gell-Mann generators with their f and d tensors.
    Basis(BasisArgs),
    /// Print only the nonzero structure constants.
    StructureConsts(BasisArgs),
    /// Fuzz one relation over random draws.
    Verify(VerifyArgs),
    /// Scan a feasible variance region.
    Region(RegionArgs),
    /// Compare the Robertson, state-dependent and Bloch bounds for one state.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

fn parse_dim(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if (2..=8).contains(&n) {
        Ok(n)
    } else {
        Err(format!("dimension {n} outside 2..=8"))
    }
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long, value_parser = parse_dim)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    relation: RelationId,
    #[arg(long, value_parser = parse_dim, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed angle between A and B in radians (three-obs-equality only).
    #[arg(long, allow_hyphen_values = true)]
    theta_ab: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionMode {
    Pair,
    Triple,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(value_enum)]
    mode: RegionMode,
    /// Angle between A and B in radians.
    #[arg(long, allow_hyphen_values = true)]
    theta_ab: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0.01)]
    grid: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_dim, default_value_t = 2)]
    dim: usize,
    /// pure | mixed | rank:K | shell:R
    #[arg(long, default_value = "pure")]
    ensemble: String,
    /// Writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    out: Option<String>,
    /// Report the range of dB over samples with dA^2 within one grid cell of this value.
    #[arg(long)]
    slice_da2: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// sigma1 | sigma2 | sigma3 | n:(x,y,z) | @file.json
    #[arg(long, default_value = "sigma1")]
    a: String,
    #[arg(long, default_value = "sigma2")]
    b: String,
    /// zero | one | plus | minus | plus-i | minus-i | mixed | bloch:(x,y,z) | @file.json | random
    #[arg(long, default_value = "random")]
    state: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate the Bloch span at this dA^2 instead of the state's own.
    #[arg(long)]
    da2: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn configure_threads() -> Result<(), commands::CliError> {
    if let Ok(v) = std::env::var("UR_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| commands::CliError::usage(format!("UR_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| commands::CliError::Runtime(e.into()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Basis(a) => commands::basis(&a, false),
        Command::StructureConsts(a) => commands::basis(&a, true),
        Command::Verify(a) => commands::verify(&a),
        Command::Region(a) => commands::region(&a),
        Command::Compare(a) => commands::compare(&a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
