use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

#[derive(Debug, Parser)]
#[command(
    name = "slackfm",
    version,
    about = "Factorization-machine surrogates with slack variables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize a QUBO read from a text model file.
    SolveQubo(SolveArgs),
    /// Run the slack-augmented regression grid for a scenario.
    RunScenario(ScenarioArgs),
    /// Run a surrogate optimization loop against a black box.
    RunOptimize(OptimizeArgs),
    /// Write a synthetic black-box spec, its hidden polynomial and samples.
    GenSynthetic(SyntheticArgs),
}

/// Annealer overrides shared by every command.
#[derive(Debug, Default, Args)]
pub struct AnnealArgs {
    /// Independent annealing restarts.
    #[arg(long)]
    pub reads: Option<usize>,
    /// Sweeps per restart.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Starting temperature (estimated from the model when omitted).
    #[arg(long)]
    pub t_initial: Option<f64>,
    /// Final temperature (1e-3 of the starting one when omitted).
    #[arg(long)]
    pub t_final: Option<f64>,
}

impl AnnealArgs {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        put_int(&mut t, "num_reads", self.reads);
        put_int(&mut t, "sweeps_per_read", self.sweeps);
        put_float(&mut t, "t_initial", self.t_initial);
        put_float(&mut t, "t_final", self.t_final);
        t
    }
}

/// Training overrides.
#[derive(Debug, Default, Args)]
pub struct TrainArgs {
    /// Latent dimension.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L1 weight on the linear coefficients.
    #[arg(long)]
    pub beta1: Option<f64>,
    /// Squared-Frobenius weight on the latent matrix.
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
}

impl TrainArgs {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        put_int(&mut t, "k", self.k);
        put_float(&mut t, "learning_rate", self.learning_rate);
        put_float(&mut t, "beta1", self.beta1);
        put_float(&mut t, "beta2", self.beta2);
        put_int(&mut t, "epochs", self.epochs);
        put_int(&mut t, "batch_size", self.batch_size);
        put_float(&mut t, "init_scale", self.init_scale);
        put_float(&mut t, "tolerance", self.tolerance);
        put_int(&mut t, "patience", self.patience);
        t
    }
}

pub fn put_int<T: TryInto<i64>>(t: &mut Table, key: &str, v: Option<T>) {
    if let Some(v) = v.and_then(|v| v.try_into().ok()) {
        t.insert(key.into(), Value::Integer(v));
    }
}

pub fn put_float(t: &mut Table, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        t.insert(key.into(), Value::Float(v));
    }
}

pub fn put_str(t: &mut Table, key: &str, v: Option<String>) {
    if let Some(v) = v {
        t.insert(key.into(), Value::String(v));
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// QUBO text file: `i coeff`, `i j coeff`, `c0 coeff`, optional `n count`.
    pub model: PathBuf,
    #[command(flatten)]
    pub anneal: AnnealArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// One-hot group as `a-b` (inclusive) or `i,j,k`; repeatable.
    #[arg(long = "one-hot", value_name = "GROUP")]
    pub one_hot: Vec<String>,
    /// Enumerate every state instead of annealing.
    #[arg(long)]
    pub brute_force: bool,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// TOML configuration; flags override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// `synthetic`, `dose-matrix` or `unseen-combination`.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Response CSV for the dataset scenarios.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Results CSV.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Split parameters: training sizes, extra training cells or missing
    /// ratios, depending on the scenario.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<f64>>,
    /// Slack counts.
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<usize>>,
    #[arg(long)]
    pub i_max: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Process at most this many combinations or cell lines.
    #[arg(long)]
    pub max_cases: Option<usize>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub anneal: AnnealArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// TOML configuration; flags override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// `fmqubo`, `hofmqubo` or `fmqubos`.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Trace CSV.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial sample count.
    #[arg(long)]
    pub n_initial: Option<usize>,
    #[arg(long)]
    pub m_slack: Option<usize>,
    #[arg(long)]
    pub i_max: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub anneal: AnnealArgs,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 3)]
    pub n_groups: usize,
    #[arg(long, default_value_t = 4)]
    pub group_size: usize,
    /// Interaction orders of the hidden polynomial.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of samples to draw into `--output`.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Samples CSV (`x,y`).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON spec; printed to stdout when omitted.
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
    /// Where to write the hidden polynomial in HUBO text format.
    #[arg(long)]
    pub hubo_out: Option<PathBuf>,
}
