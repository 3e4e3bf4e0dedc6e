use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cainfer", version, about = "Infer common ancestors from information measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-information, redundancy and entropy bounds of a distribution.
    Analyze(AnalyzeArgs),
    /// Inference from information values and a c-vector.
    Infer(InferArgs),
    /// Markov conditions, DAG-model validation and decomposition slacks.
    CheckDag(CheckDagArgs),
    /// Common-ancestor inference for files via compressed length.
    Strings(StringsArgs),
    /// Seeded batch verification on random Bayesian nets.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Tolerance for identities and independence checks.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_bits: f64,
    /// Margin a criterion must exceed before a conclusion is drawn.
    #[arg(long, default_value_t = 1e-6)]
    pub decision_tol_bits: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 1 when nothing is concluded or a check fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Distribution JSON.
    #[arg(long, group = "source")]
    pub dist: Option<PathBuf>,
    /// Samples CSV (plug-in estimate).
    #[arg(long, group = "source")]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Groups as `X1;X2,X3`: `;` separates groups, `,` separates members.
    /// Defaults to one group per variable (excluding `--y`).
    #[arg(long)]
    pub groups: Option<String>,
    /// Only evaluate this c.
    #[arg(long)]
    pub c: Option<usize>,
    /// Reference variables, comma separated, for redundancy values.
    #[arg(long)]
    pub y: Option<String>,
    /// Assert that no observation directly influences another.
    #[arg(long)]
    pub no_direct_influence: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Observation-values JSON.
    #[arg(long)]
    pub values: PathBuf,
    /// Per-group c values, comma separated.
    #[arg(long)]
    pub c_vec: Option<String>,
    /// Only evaluate this c.
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub no_direct_influence: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CheckDagArgs {
    /// DAG JSON with optional groups and reference nodes.
    #[arg(long)]
    pub dag: PathBuf,
    #[command(flatten)]
    pub source: Source,
    /// Observation-values JSON to validate against; computed from the
    /// distribution when omitted.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StringsArgs {
    /// Input files; each file's path is its label.
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    /// Defaults to one less than the number of files.
    #[arg(long)]
    pub c: Option<usize>,
    /// Defaults to 4096 bits plus 128 bits per file.
    #[arg(long)]
    pub slack_bits: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub edge_prob: f64,
    /// Worker threads; results are identical for any value.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}
