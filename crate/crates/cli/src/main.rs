//! `sparse-polar`: construct sparse polar graphs, train decoder weights,
//! simulate bit error rates and report decoding complexity.
//!
//! Exit status is 0 on success, 2 for invalid configuration or inputs and
//! 1 when a run fails after starting.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "sparse-polar", version, about = "Polar codes decoded on pruned sparse Tanner graphs")]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code and its pruned Tanner graph.
    Construct(ConstructArgs),
    /// Train min-sum weights on a graph.
    Train(TrainArgs),
    /// Monte Carlo BER simulation.
    Simulate(SimulateArgs),
    /// Per-iteration operation counts against conventional polar BP.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StageOrderArg {
    Farthest,
    Nearest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Spa,
    Ms,
    Sms,
    Wms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightKindArg {
    Single,
    PerEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    AllZero,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MultsArg {
    PerCheck,
    PerEdge,
}

/// Comma-separated list of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Grid)
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Code and graph inputs shared by the commands that consume a graph.
#[derive(Args, Debug, Clone)]
pub struct CodeArgs {
    /// Frozen-set file written by `construct`.
    #[arg(long)]
    pub frozen: PathBuf,
    /// Graph in alist form; built from the frozen set when omitted.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Butterfly stage order used when building the graph.
    #[arg(long, value_enum, default_value_t = StageOrderArg::Farthest)]
    pub stage_order: StageOrderArg,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct ConstructArgs {
    /// Code length (power of two).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of information bits.
    #[arg(long)]
    pub k: Option<usize>,
    /// Initial Bhattacharyya parameter of the frozen-set recursion.
    #[arg(long, default_value_t = 0.5)]
    pub design: f64,
    /// Load the information set from a frozen-set file instead.
    #[arg(long)]
    pub frozen_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StageOrderArg::Farthest)]
    pub stage_order: StageOrderArg,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, value_enum, default_value_t = WeightKindArg::Single)]
    pub variant: WeightKindArg,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 600)]
    pub epochs: usize,
    #[arg(long, default_value_t = 30)]
    pub samples_per_snr: usize,
    /// Training Eb/N0 grid in dB.
    #[arg(long, value_parser = parse_grid, default_value = "1,2,3,4")]
    pub snr_grid: Grid,
    /// Initial shared weight.
    #[arg(long, default_value_t = 1.0)]
    pub init: f64,
    /// Mean of per-edge initial weights.
    #[arg(long, default_value_t = 1.0)]
    pub init_mean: f64,
    /// Standard deviation of per-edge initial weights.
    #[arg(long, default_value_t = 0.1)]
    pub init_std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SourceArg::AllZero)]
    pub source: SourceArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ms)]
    pub decoder: DecoderArg,
    /// Scaling factor for `sms`.
    #[arg(long, default_value_t = 0.9375)]
    pub alpha: f64,
    /// Weights for `wms`: a weight file, or `single:<w>`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Eb/N0 points in dB.
    #[arg(long, value_parser = parse_grid, default_value = "1,2,3,4")]
    pub ebn0: Grid,
    #[arg(long, default_value_t = 500)]
    pub min_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_frames: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SourceArg::AllZero)]
    pub source: SourceArg,
    /// Stop decoding once all checks are satisfied.
    #[arg(long)]
    pub early_stop: bool,
    /// Output file stem (default: the decoder name).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Counting rule for check-node multiplications.
    #[arg(long, value_enum, default_value_t = MultsArg::PerCheck)]
    pub mults: MultsArg,
    /// Also write complexity.csv and the resolved config here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Train(a) => commands::train(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(commands::Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
