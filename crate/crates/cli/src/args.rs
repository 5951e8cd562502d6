use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "steerq", version, about = "Two-qubit steering measures, robustness and volumes of violation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form measures for random states.
    Scan(ScanArgs),
    /// Measures, robustness and hidden-state verdicts along the Werner family.
    Werner(WernerArgs),
    /// Robustness with canonical Pauli settings against the entropic measure.
    RobustScan(RobustScanArgs),
    /// Monte Carlo volume of violations for Werner states.
    Volume(VolumeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Scan(_) => "scan",
            Self::Werner(_) => "werner",
            Self::RobustScan(_) => "robust-scan",
            Self::Volume(_) => "volume",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Self::Scan(a) => &a.common,
            Self::Werner(a) => &a.common,
            Self::RobustScan(a) => &a.common,
            Self::Volume(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ensemble {
    HilbertSchmidt,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output CSV path; defaults to `<command>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Ensemble::HilbertSchmidt)]
    pub ensemble: Ensemble,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n_states: usize,
    /// Append this many Werner states with w evenly spaced on [0, 1].
    #[arg(long, default_value_t = 0)]
    pub inject_werner: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct WernerArgs {
    /// `start:stop:count` or a comma-separated list.
    #[arg(long, default_value = "0:1:21")]
    pub grid: String,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long)]
    pub with_sdp: bool,
    /// Write robustness solver iterates here, one record per line.
    #[arg(long)]
    pub solver_trace: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RobustScanArgs {
    #[arg(long)]
    pub n_states: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long)]
    pub see_saw: bool,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub see_saw_tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DbThresholdArg {
    Measure,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Linear,
    Entropic,
    Rotinv,
    Dimbound,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long, default_value = "0:1:21")]
    pub grid: String,
    /// Defaults to every criterion defined for `--m`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub criteria: Vec<CriterionArg>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = DbThresholdArg::Measure)]
    pub db_threshold: DbThresholdArg,
    /// Add the closed-form measure of each criterion as a column.
    #[arg(long)]
    pub overlay: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}
