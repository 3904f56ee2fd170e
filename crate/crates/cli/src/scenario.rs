//! `run-scenario`: the slack-augmented regression grid over every case of a
//! scenario.
//!
//! A case is one dose-response matrix (`dose-matrix`), one cell line
//! (`unseen-combination`) or one seeded synthetic black box (`synthetic`).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use slackfm_core::data::{
    load_records, make_synthetic_blackbox, scenario2_datasets, split_scenario1, split_scenario2, DoseMatrix,
    EncodingSpec, ResponseRecord, Scenario, MATRIX_SIZE,
};
use slackfm_core::seed::derive_seed;
use slackfm_core::surrogate::{grid_test, GridEntry, GridResult};
use slackfm_core::{summarize, AnnealConfig, BlackBox, Dataset, SurrogateConfig, TrainConfig};

use crate::args::{put_float, put_int, put_str, ScenarioArgs};
use crate::config::{check_keys, read_table, resolve, Schema, ANNEAL_KEYS, TRAIN_KEYS};
use crate::error::{CliError, CliResult};
use crate::output::{config_hash, opt, sha256_hex, write_csv};

const SCHEMA: Schema = Schema {
    top: &[
        "scenario",
        "data",
        "output",
        "seed",
        "n_values",
        "n_range",
        "m_values",
        "m_range",
        "i_max",
        "epsilon",
        "warm_start",
        "max_cases",
    ],
    sections: &[
        (
            "synthetic",
            &["n_groups", "group_size", "orders", "noise_sd", "n_test", "cases"],
        ),
        ("train", TRAIN_KEYS),
        ("anneal", ANNEAL_KEYS),
    ],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Synthetic,
    DoseMatrix,
    UnseenCombination,
}

impl ScenarioKind {
    fn name(self) -> &'static str {
        match self {
            ScenarioKind::Synthetic => "synthetic",
            ScenarioKind::DoseMatrix => "dose-matrix",
            ScenarioKind::UnseenCombination => "unseen-combination",
        }
    }

    fn split_column(self) -> &'static str {
        match self {
            ScenarioKind::UnseenCombination => "missing_ratio",
            _ => "n_1",
        }
    }

    fn default_n_values(self) -> Vec<f64> {
        match self {
            ScenarioKind::Synthetic => vec![300.0],
            ScenarioKind::DoseMatrix => vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            ScenarioKind::UnseenCombination => vec![0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }

    fn train_preset(self) -> TrainConfig {
        match self {
            ScenarioKind::UnseenCombination => TrainConfig::unseen_combination(),
            _ => TrainConfig::dose_matrix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub n_groups: usize,
    pub group_size: usize,
    pub orders: Vec<usize>,
    pub noise_sd: f64,
    /// Test samples per case.
    pub n_test: usize,
    /// Number of independently seeded black boxes.
    pub cases: usize,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        SyntheticSection {
            n_groups: 3,
            group_size: 4,
            orders: vec![3],
            noise_sd: 0.1,
            n_test: 100,
            cases: 10,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopLevel {
    #[serde(default = "default_kind")]
    scenario: ScenarioKind,
    data: Option<PathBuf>,
    #[serde(default = "default_output")]
    output: PathBuf,
    #[serde(default)]
    seed: u64,
    n_values: Option<Vec<f64>>,
    n_range: Option<[f64; 2]>,
    m_values: Option<Vec<usize>>,
    m_range: Option<[usize; 2]>,
    #[serde(default = "default_i_max")]
    i_max: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_true")]
    warm_start: bool,
    max_cases: Option<usize>,
    #[serde(default)]
    synthetic: SyntheticSection,
    #[serde(default)]
    train: Table,
    #[serde(default)]
    anneal: Table,
}

fn default_kind() -> ScenarioKind {
    ScenarioKind::Synthetic
}
fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
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

/// Fully resolved run settings; their hash heads the results CSV. The
/// output path is left out so identical runs hash identically wherever they
/// write, and the data file enters by content.
#[derive(Debug, Serialize)]
pub struct RunSettings {
    pub scenario: ScenarioKind,
    #[serde(skip)]
    pub data: Option<PathBuf>,
    pub data_sha256: Option<String>,
    #[serde(skip)]
    pub output: PathBuf,
    pub seed: u64,
    pub n_values: Vec<f64>,
    pub m_values: Vec<usize>,
    pub i_max: usize,
    pub epsilon: f64,
    pub warm_start: bool,
    pub max_cases: Option<usize>,
    pub synthetic: Option<SyntheticSection>,
    pub train: TrainConfig,
    pub anneal: AnnealConfig,
}

fn flag_table(args: &ScenarioArgs) -> Table {
    let mut t = Table::new();
    put_str(&mut t, "scenario", args.scenario.clone());
    put_str(&mut t, "data", args.data.as_ref().map(|p| p.display().to_string()));
    put_str(&mut t, "output", args.output.as_ref().map(|p| p.display().to_string()));
    put_int(&mut t, "seed", args.seed);
    put_int(&mut t, "i_max", args.i_max);
    put_float(&mut t, "epsilon", args.epsilon);
    put_int(&mut t, "max_cases", args.max_cases);
    if let Some(ns) = &args.n_values {
        t.insert(
            "n_values".into(),
            Value::Array(ns.iter().map(|&v| Value::Float(v)).collect()),
        );
    }
    if let Some(ms) = &args.m_values {
        t.insert(
            "m_values".into(),
            Value::Array(ms.iter().map(|&v| Value::Integer(v as i64)).collect()),
        );
    }
    t
}

fn inclusive_range(lo: f64, hi: f64) -> CliResult<Vec<f64>> {
    if !(lo <= hi) || lo.fract() != 0.0 || hi.fract() != 0.0 {
        return Err(CliError::Usage(format!(
            "n_range [{lo}, {hi}] must be increasing integers"
        )));
    }
    Ok((lo as i64..=hi as i64).map(|v| v as f64).collect())
}

pub fn resolve_settings(args: &ScenarioArgs) -> CliResult<RunSettings> {
    let mut table = read_table(args.config.as_deref())?;
    check_keys(&table, &SCHEMA)?;
    let flags = flag_table(args);
    if flags.contains_key("n_values") {
        table.remove("n_range");
    }
    if flags.contains_key("m_values") {
        table.remove("m_range");
    }
    crate::config::overlay(&mut table, &flags);
    let top: TopLevel = table
        .clone()
        .try_into()
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;

    let n_values = match (top.n_values, top.n_range) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give n_values or n_range, not both".into())),
        (Some(v), None) => v,
        (None, Some([a, b])) => inclusive_range(a, b)?,
        (None, None) => top.scenario.default_n_values(),
    };
    let m_values = match (top.m_values, top.m_range) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give m_values or m_range, not both".into())),
        (Some(v), None) => v,
        (None, Some([a, b])) if a <= b => (a..=b).collect(),
        (None, Some(_)) => return Err(CliError::Usage("m_range must be increasing".into())),
        (None, None) => vec![0, 8],
    };
    if n_values.is_empty() || m_values.is_empty() {
        return Err(CliError::Usage("n and m grids must be nonempty".into()));
    }

    let train = resolve(
        &top.scenario.train_preset(),
        &[&top.train, &args.train.to_table()],
        "train",
    )?;
    let anneal = resolve(
        &AnnealConfig::default(),
        &[&top.anneal, &args.anneal.to_table()],
        "anneal",
    )?;

    let data_sha256 = match (&top.data, top.scenario) {
        (_, ScenarioKind::Synthetic) => None,
        (None, kind) => return Err(CliError::Usage(format!("scenario {} needs a data file", kind.name()))),
        (Some(path), _) => {
            let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            Some(sha256_hex(&bytes))
        }
    };
    Ok(RunSettings {
        synthetic: (top.scenario == ScenarioKind::Synthetic).then_some(top.synthetic),
        data: top.data,
        data_sha256,
        output: top.output,
        scenario: top.scenario,
        seed: top.seed,
        n_values,
        m_values,
        i_max: top.i_max,
        epsilon: top.epsilon,
        warm_start: top.warm_start,
        max_cases: top.max_cases,
        train,
        anneal,
    })
}

type Splitter<'a> = Box<dyn Fn(f64, u64) -> slackfm_core::Result<(Dataset, Dataset)> + Sync + 'a>;

struct Case<'a> {
    label: String,
    groups: Vec<Vec<usize>>,
    split: Splitter<'a>,
}

fn validate_split_values(s: &RunSettings) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::Data(format!("invalid input: {msg}")));
    for &v in &s.n_values {
        match s.scenario {
            ScenarioKind::Synthetic if !(v >= 1.0 && v.fract() == 0.0) => {
                return bad(format!("training size {v} must be a positive integer"))
            }
            ScenarioKind::DoseMatrix => {
                let available = MATRIX_SIZE * MATRIX_SIZE - (3 * MATRIX_SIZE - 2);
                if !(v >= 0.0 && v.fract() == 0.0) || v > available as f64 {
                    return bad(format!("n_extra {v} must be an integer in 0..={available}"));
                }
            }
            ScenarioKind::UnseenCombination if !(v > 0.0 && v < 1.0) => {
                return bad(format!("missing_ratio {v} outside (0, 1)"))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Runs every case and returns `(case label, entry)` rows in case order.
pub fn execute(s: &RunSettings) -> CliResult<Vec<(String, GridEntry)>> {
    validate_split_values(s)?;
    let records: Vec<ResponseRecord> = match (s.scenario, &s.data) {
        (ScenarioKind::DoseMatrix, Some(p)) => load_records(p, Scenario::DoseMatrix)?,
        (ScenarioKind::UnseenCombination, Some(p)) => load_records(p, Scenario::UnseenCombination)?,
        _ => Vec::new(),
    };

    let mut cases: Vec<Case> = Vec::new();
    match s.scenario {
        ScenarioKind::Synthetic => {
            let syn = s.synthetic.clone().unwrap_or_default();
            for c in 0..syn.cases {
                let bb = make_synthetic_blackbox(
                    syn.n_groups,
                    syn.group_size,
                    &syn.orders,
                    syn.noise_sd,
                    derive_seed(s.seed, "synthetic-box", &[c as u64]),
                )?;
                let n_test = syn.n_test;
                cases.push(Case {
                    label: format!("synthetic-{c}"),
                    groups: bb.one_hot_groups(),
                    split: Box::new(move |n1, seed| {
                        Ok((
                            bb.sample(n1 as usize, seed)?,
                            bb.sample(n_test, derive_seed(seed, "test", &[]))?,
                        ))
                    }),
                });
            }
        }
        ScenarioKind::DoseMatrix => {
            let groups = EncodingSpec::scenario1().one_hot_groups();
            for m in DoseMatrix::from_records(&records)? {
                cases.push(Case {
                    label: m.label(),
                    groups: groups.clone(),
                    split: Box::new(move |n1, seed| m.datasets(&split_scenario1(n1 as usize, seed)?)),
                });
            }
        }
        ScenarioKind::UnseenCombination => {
            let spec = EncodingSpec::scenario2_from_records(&records)?;
            let mut by_line: BTreeMap<String, Vec<ResponseRecord>> = BTreeMap::new();
            for r in &records {
                by_line.entry(r.cell_line.clone()).or_default().push(r.clone());
            }
            for (line, rs) in by_line {
                let spec = spec.clone();
                cases.push(Case {
                    label: line,
                    groups: spec.one_hot_groups(),
                    split: Box::new(move |ratio, seed| {
                        let (train, test) = split_scenario2(&rs, ratio, seed)?;
                        scenario2_datasets(&train, &test, &spec)
                    }),
                });
            }
        }
    }
    if let Some(limit) = s.max_cases {
        cases.truncate(limit);
    }
    if cases.is_empty() {
        return Err(CliError::Data("no cases to run".into()));
    }

    let mut rows = Vec::new();
    for (c, case) in cases.iter().enumerate() {
        let cfg = SurrogateConfig {
            m_slack: 0,
            slack_init: None,
            i_max: s.i_max,
            epsilon: s.epsilon,
            seed: derive_seed(s.seed, "case", &[c as u64]),
            warm_start: s.warm_start,
            skip_duplicates: false,
            train: s.train.clone(),
            anneal: s.anneal.clone().with_groups(case.groups.clone()),
        };
        let grid = grid_test(&case.split, &s.n_values, &s.m_values, &cfg)?;
        rows.extend(grid.entries.into_iter().map(|e| (case.label.clone(), e)));
    }
    Ok(rows)
}

pub fn csv_rows(s: &RunSettings, rows: &[(String, GridEntry)]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|(label, e)| {
            vec![
                s.scenario.name().to_string(),
                e.n_1.to_string(),
                e.m.to_string(),
                e.seed.to_string(),
                opt(e.pearson),
                opt(e.spearman),
                e.train_loss.to_string(),
                e.iterations.to_string(),
                e.n_nonzero_slack.to_string(),
                e.converged.to_string(),
                label.clone(),
            ]
        })
        .collect()
}

fn print_summary(s: &RunSettings, rows: &[(String, GridEntry)]) {
    println!(
        "scenario {}: {} cases, {} rows",
        s.scenario.name(),
        rows.len() / (s.n_values.len() * s.m_values.len()),
        rows.len()
    );
    for &n1 in &s.n_values {
        for &m in &s.m_values {
            let cell: Vec<&GridEntry> = rows
                .iter()
                .map(|(_, e)| e)
                .filter(|e| e.n_1 == n1 && e.m == m)
                .collect();
            let metrics: Vec<(f64, f64)> = cell
                .iter()
                .map(|e| (e.pearson.unwrap_or(f64::NAN), e.spearman.unwrap_or(f64::NAN)))
                .collect();
            let flags: Vec<bool> = cell.iter().map(|e| e.converged).collect();
            let head = format!("{}={n1} m={m}", s.scenario.split_column());
            match summarize(&metrics, &flags) {
                Ok(sum) => println!(
                    "{head} pearson={:.4} (sd {:.4}) spearman={:.4} (sd {:.4}) cases={} failed={}",
                    sum.pearson_mean, sum.pearson_std, sum.spearman_mean, sum.spearman_std, sum.n_cases, sum.n_failed
                ),
                Err(_) => println!("{head} no converged cases (failed={})", cell.len()),
            }
        }
    }
    let all = GridResult {
        entries: rows.iter().map(|(_, e)| e.clone()).collect(),
    };
    for (m, frac) in all.nonzero_slack_fraction_by_m() {
        println!("nonzero slack fraction m={m}: {frac:.4}");
    }
}

pub fn run(args: &ScenarioArgs) -> CliResult<()> {
    let settings = resolve_settings(args)?;
    let hash = config_hash(&settings)?;
    let rows = execute(&settings)?;
    let header = [
        "scenario",
        settings.scenario.split_column(),
        "m",
        "seed",
        "pearson",
        "spearman",
        "train_loss",
        "iterations",
        "n_nonzero_slack",
        "converged",
        "case",
    ];
    write_csv(&settings.output, &hash, &header, &csv_rows(&settings, &rows))?;
    print_summary(&settings, &rows);
    println!("wrote {}", settings.output.display());
    Ok(())
}
