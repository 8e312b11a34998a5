use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "stargen", version, about = "Stargenfunctions and star-exponentials on phase space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a (non-)diagonal stargenfunction on a grid.
    Stargen(StargenArgs),
    /// Run a verification suite and report residuals.
    Verify(VerifyArgs),
    /// Propagate an observable under the model Hamiltonian.
    Evolve(EvolveArgs),
    /// Export a symbol, Hamiltonian, measure or spectrum as JSON.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat JSON file with default values for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ho1d, ho2d or linear.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Axis spec `min:max:step`; give it once for every axis or once per
    /// axis in the order q1..qN, p1..pN.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Overrides the tolerance of every check.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Indices selecting a stargenfunction.
#[derive(Debug, Clone, Default, Args)]
pub struct Indices {
    /// Row index (ho1d).
    #[arg(long)]
    pub n: Option<u32>,
    /// Column index (ho1d); defaults to `n`.
    #[arg(long)]
    pub m: Option<u32>,
    /// Energy level (ho2d).
    #[arg(long)]
    pub r: Option<u32>,
    /// Right angular index in I_r (ho2d).
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<i32>,
    /// Left angular index in I_r (ho2d); defaults to `s`.
    #[arg(long, allow_negative_numbers = true)]
    pub sprime: Option<i32>,
    /// Right energy (linear).
    #[arg(long, allow_negative_numbers = true)]
    pub e: Option<f64>,
    /// Left energy (linear); defaults to `e`.
    #[arg(long, allow_negative_numbers = true)]
    pub eprime: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StargenArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub indices: Indices,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// stargenvalue, normalization, orthogonality, theorem, semiclassical,
    /// evolution, special-fn or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Largest index checked.
    #[arg(long)]
    pub max_n: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// q, p, h (1-D); q1, q2, p1, p2, h, l3 (2-D).
    #[arg(long)]
    pub observable: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Also write the table P(H = E) for the state selected by the indices.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Atoms kept in the probability table.
    #[arg(long)]
    pub max_n: Option<u32>,
    #[command(flatten)]
    pub indices: Indices,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    /// symbol, hamiltonian, measure or spectrum.
    #[arg(long)]
    pub what: Option<String>,
    /// Atoms or levels kept in a measure or spectrum.
    #[arg(long)]
    pub max_n: Option<u32>,
    #[command(flatten)]
    pub indices: Indices,
}
