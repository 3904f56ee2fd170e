//! `run-optimize`: a surrogate optimization loop against a configured black
//! box, written out as an iteration trace.

use std::fs;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use slackfm_core::anneal::groups_satisfied;
use slackfm_core::binopt::text::parse_hubo;
use slackfm_core::data::{load_records, make_table_blackbox, EncodingSpec, Scenario, SyntheticBlackBox, SyntheticSpec};
use slackfm_core::surrogate::{fmqubo_optimize, fmqubos_optimize, hofmqubo_optimize, OptimizeOutcome};
use slackfm_core::{AnnealConfig, BinaryVector, BlackBox, Dataset, Error, HuboModel, SurrogateConfig, TrainConfig};

use crate::args::{put_float, put_int, put_str, OptimizeArgs};
use crate::config::{check_keys, overlay, read_table, resolve, Schema, ANNEAL_KEYS, TRAIN_KEYS};
use crate::error::{CliError, CliResult};
use crate::output::{config_hash, opt, sha256_hex, write_csv};

const SCHEMA: Schema = Schema {
    top: &[
        "optimizer",
        "output",
        "seed",
        "n_initial",
        "m_slack",
        "i_max",
        "epsilon",
        "warm_start",
        "skip_duplicates",
    ],
    sections: &[
        (
            "blackbox",
            &[
                "kind",
                "n_groups",
                "group_size",
                "orders",
                "noise_sd",
                "seed",
                "model",
                "one_hot",
                "data",
                "scenario",
            ],
        ),
        ("train", TRAIN_KEYS),
        ("anneal", ANNEAL_KEYS),
    ],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Fmqubo,
    Hofmqubo,
    Fmqubos,
}

/// Where responses come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BlackBoxSpec {
    /// Seeded hidden polynomial over one-hot blocks.
    Synthetic {
        #[serde(default = "three")]
        n_groups: usize,
        #[serde(default = "four")]
        group_size: usize,
        #[serde(default = "all_orders")]
        orders: Vec<usize>,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A QUBO/HUBO text file evaluated exactly.
    Polynomial {
        model: PathBuf,
        #[serde(default)]
        one_hot: Vec<Vec<usize>>,
    },
    /// Measured responses; absent combinations cannot be queried.
    Table { data: PathBuf, scenario: Scenario },
}

fn three() -> usize {
    3
}
fn four() -> usize {
    4
}
fn all_orders() -> Vec<usize> {
    vec![1, 2, 3]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopLevel {
    #[serde(default = "default_optimizer")]
    optimizer: Optimizer,
    #[serde(default = "default_output")]
    output: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_n_initial")]
    n_initial: usize,
    #[serde(default)]
    m_slack: usize,
    #[serde(default = "default_i_max")]
    i_max: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_true")]
    warm_start: bool,
    #[serde(default)]
    skip_duplicates: bool,
    blackbox: Option<BlackBoxSpec>,
    #[serde(default)]
    train: Table,
    #[serde(default)]
    anneal: Table,
}

fn default_optimizer() -> Optimizer {
    Optimizer::Fmqubo
}
fn default_output() -> PathBuf {
    PathBuf::from("trace.csv")
}
fn default_n_initial() -> usize {
    20
}
fn default_i_max() -> usize {
    SurrogateConfig::default().i_max
}
fn default_epsilon() -> f64 {
    SurrogateConfig::default().epsilon
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize)]
pub struct OptimizeSettings {
    pub optimizer: Optimizer,
    #[serde(skip)]
    pub output: PathBuf,
    pub n_initial: usize,
    pub blackbox: BlackBoxSpec,
    /// Content hash of the black box's backing file, if any.
    pub blackbox_sha256: Option<String>,
    pub surrogate: SurrogateConfig,
}

fn flag_table(args: &OptimizeArgs) -> Table {
    let mut t = Table::new();
    put_str(&mut t, "optimizer", args.optimizer.clone());
    put_str(&mut t, "output", args.output.as_ref().map(|p| p.display().to_string()));
    put_int(&mut t, "seed", args.seed);
    put_int(&mut t, "n_initial", args.n_initial);
    put_int(&mut t, "m_slack", args.m_slack);
    put_int(&mut t, "i_max", args.i_max);
    put_float(&mut t, "epsilon", args.epsilon);
    t
}

pub fn resolve_settings(args: &OptimizeArgs) -> CliResult<OptimizeSettings> {
    let mut table = read_table(args.config.as_deref())?;
    check_keys(&table, &SCHEMA)?;
    overlay(&mut table, &flag_table(args));
    if !table.contains_key("blackbox") {
        let mut bb = Table::new();
        bb.insert("kind".into(), Value::String("synthetic".into()));
        table.insert("blackbox".into(), Value::Table(bb));
    }
    let top: TopLevel = table
        .try_into()
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    let train: TrainConfig = resolve(&TrainConfig::default(), &[&top.train, &args.train.to_table()], "train")?;
    let anneal: AnnealConfig = resolve(
        &AnnealConfig::default(),
        &[&top.anneal, &args.anneal.to_table()],
        "anneal",
    )?;
    let blackbox = top.blackbox.expect("inserted above");
    let backing = match &blackbox {
        BlackBoxSpec::Polynomial { model, .. } => Some(model),
        BlackBoxSpec::Table { data, .. } => Some(data),
        BlackBoxSpec::Synthetic { .. } => None,
    };
    let blackbox_sha256 = match backing {
        Some(p) => {
            Some(sha256_hex(&fs::read(p).map_err(|e| {
                CliError::Data(format!("cannot read {}: {e}", p.display()))
            })?))
        }
        None => None,
    };
    Ok(OptimizeSettings {
        optimizer: top.optimizer,
        output: top.output,
        n_initial: top.n_initial,
        blackbox,
        blackbox_sha256,
        surrogate: SurrogateConfig {
            m_slack: top.m_slack,
            slack_init: None,
            i_max: top.i_max,
            epsilon: top.epsilon,
            seed: top.seed,
            warm_start: top.warm_start,
            skip_duplicates: top.skip_duplicates,
            train,
            anneal,
        },
    })
}

/// Exact polynomial black box; samples are uniform over feasible inputs.
pub struct PolynomialBox {
    hubo: HuboModel,
    groups: Vec<Vec<usize>>,
}

impl BlackBox for PolynomialBox {
    fn n_inputs(&self) -> usize {
        self.hubo.n_vars()
    }

    fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        self.groups.clone()
    }

    fn query(&self, x: &[u8]) -> slackfm_core::Result<f64> {
        if !groups_satisfied(x, &self.groups) {
            return Err(Error::Domain("input violates the one-hot groups".into()));
        }
        self.hubo.energy(x)
    }

    fn sample(&self, n: usize, seed: u64) -> slackfm_core::Result<Dataset> {
        let mut rng = slackfm_core::seed::rng_from(seed);
        Dataset::from_pairs(
            (0..n)
                .map(|_| {
                    let x = uniform_bits(self.n_inputs(), &self.groups, &mut rng);
                    let y = self.query(&x)?;
                    Ok((x, y))
                })
                .collect::<slackfm_core::Result<Vec<_>>>()?,
        )
    }
}

/// Uniform bits outside the groups, one uniform hot bit inside each.
fn uniform_bits(n: usize, groups: &[Vec<usize>], rng: &mut impl Rng) -> BinaryVector {
    let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    for g in groups.iter().filter(|g| !g.is_empty()) {
        g.iter().for_each(|&i| bits[i] = 0);
        bits[g[rng.random_range(0..g.len())]] = 1;
    }
    BinaryVector::new(bits).expect("bits are binary")
}

pub fn build_blackbox(spec: &BlackBoxSpec) -> CliResult<Box<dyn BlackBox>> {
    Ok(match spec {
        BlackBoxSpec::Synthetic {
            n_groups,
            group_size,
            orders,
            noise_sd,
            seed,
        } => Box::new(SyntheticBlackBox::from_spec(SyntheticSpec {
            n_groups: *n_groups,
            group_size: *group_size,
            orders: orders.clone(),
            noise_sd: *noise_sd,
            seed: *seed,
        })?),
        BlackBoxSpec::Polynomial { model, one_hot } => {
            let text = fs::read_to_string(model)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", model.display())))?;
            let hubo = parse_hubo(&text).map_err(|e| CliError::Data(format!("{}: {e}", model.display())))?;
            if one_hot.iter().flatten().any(|&i| i >= hubo.n_vars()) {
                return Err(CliError::Data(
                    "one-hot group index beyond the model's variables".into(),
                ));
            }
            Box::new(PolynomialBox {
                hubo,
                groups: one_hot.clone(),
            })
        }
        BlackBoxSpec::Table { data, scenario } => {
            let records = load_records(data, *scenario)?;
            let enc = match scenario {
                Scenario::DoseMatrix => EncodingSpec::scenario1(),
                Scenario::UnseenCombination => EncodingSpec::scenario2_from_records(&records)?,
            };
            Box::new(make_table_blackbox(&records, &enc)?)
        }
    })
}

pub fn execute(s: &OptimizeSettings) -> CliResult<OptimizeOutcome> {
    let bb = build_blackbox(&s.blackbox)?;
    let out = match s.optimizer {
        Optimizer::Fmqubo => fmqubo_optimize(bb.as_ref(), s.n_initial, &s.surrogate)?,
        Optimizer::Hofmqubo => hofmqubo_optimize(bb.as_ref(), s.n_initial, &s.surrogate)?,
        Optimizer::Fmqubos => fmqubos_optimize(bb.as_ref(), s.n_initial, &s.surrogate)?,
    };
    Ok(out)
}

pub fn run(args: &OptimizeArgs) -> CliResult<()> {
    let settings = resolve_settings(args)?;
    let hash = config_hash(&settings)?;
    let out = execute(&settings)?;
    let eps = settings.surrogate.epsilon;
    let rows: Vec<Vec<String>> = out
        .trace
        .records
        .iter()
        .map(|r| {
            let hit = r.observed.is_some_and(|y| (y - r.predicted).abs() < eps);
            vec![
                r.iteration.to_string(),
                r.x.to_string(),
                r.slack.to_string(),
                r.predicted.to_string(),
                opt(r.observed),
                r.train_loss.to_string(),
                r.n_samples.to_string(),
                r.reduction_consistent.map(|b| b.to_string()).unwrap_or_default(),
                hit.to_string(),
            ]
        })
        .collect();
    let header = [
        "iteration",
        "x",
        "slack",
        "predicted",
        "observed",
        "train_loss",
        "n_samples",
        "reduction_consistent",
        "converged",
    ];
    write_csv(&settings.output, &hash, &header, &rows)?;
    println!("converged: {}", out.converged);
    println!("iterations: {}", out.trace.len());
    println!("x: {}", out.x);
    println!("y: {}", out.y);
    println!("y_true: {}", out.y_true);
    println!("wrote {}", settings.output.display());
    Ok(())
}
