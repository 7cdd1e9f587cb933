use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use fmm2d_core::{ThetaConfig, TreeConfig};

use crate::dist::{DistKind, DistributionSpec};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "fmm2d", version, about = "Adaptive 2D fast multipole method for the harmonic kernel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the FMM against direct summation and time both.
    Accuracy(CommonArgs),
    /// Sweep the points-per-box target for one or more expansion orders.
    Calibrate(CalibrateArgs),
    /// Time FMM and direct summation over a range of N and report the crossover.
    Breakeven(BreakevenArgs),
    /// Time non-uniform distributions relative to uniform ones.
    Adaptivity(AdaptivityArgs),
    /// Evaluate the potential and write it as CSV.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fmm,
    Direct,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Number of sources.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Number of separate evaluation points (default: evaluate at the sources).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = DistKind::Uniform)]
    pub dist: DistKind,
    /// Variance of the normal and layer distributions.
    #[arg(long, default_value_t = 0.01)]
    pub sigma2: f64,
    /// Expansion order.
    #[arg(long, default_value_t = 17)]
    pub p: usize,
    /// Desired sources per finest-level box.
    #[arg(long, default_value_t = 35)]
    pub nd: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub parallel: bool,
    /// Use the pairwise near-field kernel (sequential runs only).
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub symmetric_p2p: bool,
    /// Point file with `x y gamma` lines; replaces the generated sources.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Timed repetitions after one discarded warm-up run.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
}

impl CommonArgs {
    pub fn tree_config(&self) -> Result<TreeConfig> {
        self.tree_config_with(self.p, self.nd)
    }

    pub fn tree_config_with(&self, p: usize, nd: usize) -> Result<TreeConfig> {
        let cfg = TreeConfig {
            n_desired_per_box: nd,
            theta: ThetaConfig::new(self.theta)?,
            p_terms: p,
            parallel: self.parallel,
            symmetric_p2p: self.symmetric_p2p,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn distribution(&self, kind: DistKind) -> Result<DistributionSpec> {
        DistributionSpec::new(kind, self.sigma2, self.seed)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Points-per-box values to sweep.
    #[arg(long, value_delimiter = ',', default_value = "10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90,95,100")]
    pub nd_list: Vec<usize>,
    /// Expansion orders to sweep (default: the value of --p).
    #[arg(long, value_delimiter = ',')]
    pub p_list: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BreakevenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Source counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048,4096,8192,16384,32768")]
    pub n_list: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct AdaptivityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distributions to compare; uniform is always run as the baseline.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "uniform,normal,layer")]
    pub dists: Vec<DistKind>,
    /// Source counts (default: the value of --n).
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory for the mesh dump (`boxes.csv`, `connectivity.csv`).
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}
