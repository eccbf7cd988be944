//! Command-line and config-file arguments.
//!
//! Every field is optional so that a config file can fill what the command line
//! leaves out; defaults are applied when a command runs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "renorm",
    version,
    about = "Renormalization operator experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalOpts {
    /// Directory for CSV tables and the JSON manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplier applied to every check tolerance.
    #[arg(long = "tol-scale", global = true)]
    #[serde(rename = "tol-scale", alias = "tol_scale")]
    pub tol_scale: Option<f64>,
    /// TOML file with a [global] section and one section per command.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Interval operator on potentials of [0,1].
    Interval(IntervalArgs),
    /// One-sided shift operator on cylinder potentials.
    Shift(ShiftArgs),
    /// Two-sided shift operator.
    Twosided(TwosidedArgs),
    /// Baker operator on the square.
    Baker(BakerArgs),
    /// Exhaustive search for the conjugating map H.
    Uniqueness(UniquenessArgs),
    /// Parameter solver and continued-fraction round trips.
    Cf(CfArgs),
    /// The induced interval map f_beta.
    Fbeta(FbetaArgs),
    /// Runs every command with its default battery.
    CheckAll,
    /// Compares the tables of two manifests.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntervalArgs {
    #[arg(long)]
    pub t: Option<f64>,
    /// Iteration depths.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// fixed | canonical | zero | powerlaw:C,S | perturbed:C,S,P,Q
    #[arg(long)]
    pub potential: Option<String>,
    /// Number of grid points on [0.1, 2^(-1/t)].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Offset of the operator.
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub c1: Option<Vec<u64>>,
    /// fixed | harmonic | perturbed:EPS
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwosidedArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// Cylinder pairs ZETA:C1.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    /// fixed | bare
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BakerArgs {
    /// corrected | literal
    #[arg(long)]
    pub variant: Option<String>,
    /// Points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Upper end of the grid on each axis.
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessArgs {
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfArgs {
    /// Solve the constraints for these beta values.
    #[arg(long, value_delimiter = ',', conflicts_with = "solve_a")]
    pub beta: Option<Vec<f64>>,
    /// Find beta for these integer offsets.
    #[arg(long = "solve-a", value_delimiter = ',')]
    #[serde(rename = "solve-a", alias = "solve_a")]
    pub solve_a: Option<Vec<u64>>,
    /// Random round-trip samples per parameter set.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Truncation depth.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbetaArgs {
    /// Integer offset; beta is solved from it.
    #[arg(long, conflicts_with = "beta")]
    pub a: Option<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Grid points on [0, 2^beta - 1].
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub left: PathBuf,
    pub right: PathBuf,
}
