use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::optimize::{fqm, training_mse};
use super::{IterationRecord, IterationTrace, SurrogateConfig};
use crate::anneal::solve;
use crate::binopt::BinaryVector;
use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::fm::FmModel;
use crate::metrics::{mse_loss, pearson, spearman};
use crate::seed::derive_seed;

pub fn count_nonzero_slack(s: &[u8]) -> usize {
    s.iter().filter(|&&b| b == 1).count()
}

#[derive(Debug, Clone)]
pub struct FqexOutcome {
    pub model: FmModel,
    /// Slack block the final model was trained with; test inputs are
    /// extended with it.
    pub slack: BinaryVector,
    /// Unregularized training MSE of the final model.
    pub train_loss: f64,
    pub test_predictions: Vec<f64>,
    pub test_mse: f64,
    /// `None` when the predictions (or targets) are constant.
    pub test_pearson: Option<f64>,
    pub test_spearman: Option<f64>,
    pub iterations: usize,
    /// The training loss dropped below `epsilon`.
    pub reached_epsilon: bool,
    pub trace: IterationTrace,
}

struct TestMetrics {
    predictions: Vec<f64>,
    mse: f64,
    pearson: Option<f64>,
    spearman: Option<f64>,
}

fn evaluate(model: &FmModel, test: &Dataset, slack: &[u8]) -> Result<TestMetrics> {
    let predictions = test
        .inputs()
        .iter()
        .map(|x| model.predict(&x.concat(slack)))
        .collect::<Result<Vec<_>>>()?;
    let defined = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(Error::Validation(_)) if test.len() < 2 => Ok(None),
        Err(e) => Err(e),
    };
    Ok(TestMetrics {
        mse: mse_loss(test.targets(), &predictions)?,
        pearson: defined(pearson(test.targets(), &predictions))?,
        spearman: defined(spearman(test.targets(), &predictions))?,
        predictions,
    })
}

/// Slack-augmented FM regression. Each iteration trains on the training set
/// extended with the current slack block, minimizes the model's QUBO and
/// takes the trailing solution bits as the next slack block. The loop stops
/// once the training loss falls below `epsilon` or after `i_max` iterations.
/// Test metrics are recorded per iteration but never steer the loop.
pub fn fqex(train: &Dataset, test: &Dataset, cfg: &SurrogateConfig) -> Result<FqexOutcome> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::validation("training and test sets must be non-empty"));
    }
    let n = train.width().unwrap_or(0);
    check_len(n, test.width().unwrap_or(0))?;
    let groups = cfg.anneal.one_hot_groups.clone();
    if groups.iter().flatten().any(|&i| i >= n) {
        return Err(Error::validation(
            "one-hot groups must lie within the original features",
        ));
    }

    let mut slack = cfg.initial_slack();
    let mut trace = IterationTrace::default();
    let mut previous: Option<FmModel> = None;
    let mut outcome = None;

    for i in 0..cfg.i_max {
        let warm = if cfg.warm_start { previous.as_ref() } else { None };
        let (model, qubo) = fqm(train, &slack, &cfg.train_for(i), warm)?;
        let sol = solve(&qubo, &cfg.anneal_for(i, groups.clone()))?;
        let next_slack = BinaryVector::new(sol.best_x[n..].to_vec())?;

        let loss = training_mse(&model, train, &slack)?;
        let metrics = evaluate(&model, test, &slack)?;
        trace.records.push(IterationRecord {
            iteration: i,
            slack: slack.clone(),
            x: BinaryVector::new(sol.best_x[..n].to_vec())?,
            predicted: sol.best_energy,
            observed: None,
            train_loss: loss,
            test_mse: Some(metrics.mse),
            test_pearson: metrics.pearson,
            test_spearman: metrics.spearman,
            n_samples: train.len(),
            reduction_consistent: None,
        });
        let reached = loss < cfg.epsilon;
        outcome = Some(FqexOutcome {
            model: model.clone(),
            slack: slack.clone(),
            train_loss: loss,
            test_predictions: metrics.predictions,
            test_mse: metrics.mse,
            test_pearson: metrics.pearson,
            test_spearman: metrics.spearman,
            iterations: i + 1,
            reached_epsilon: reached,
            trace: IterationTrace::default(),
        });
        if reached {
            break;
        }
        slack = next_slack;
        previous = Some(model);
    }
    let mut out = outcome.expect("i_max >= 1");
    out.trace = trace;
    Ok(out)
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    /// Split parameter: training-set size, extra training cells, or a
    /// missing-data ratio, depending on the caller's splitter.
    pub n_1: f64,
    pub m: usize,
    pub seed: u64,
    /// Final training loss; NaN when training failed.
    pub train_loss: f64,
    pub test_mse: Option<f64>,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub iterations: usize,
    pub n_nonzero_slack: usize,
    /// Training finished with a finite loss and both test correlations are
    /// defined. Cases failing this are excluded from summaries.
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GridResult {
    pub entries: Vec<GridEntry>,
}

impl GridResult {
    /// Mean fraction of slack bits set, per slack count `m > 0`.
    pub fn nonzero_slack_fraction_by_m(&self) -> BTreeMap<usize, f64> {
        let mut acc: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for e in self.entries.iter().filter(|e| e.m > 0 && e.converged) {
            let slot = acc.entry(e.m).or_default();
            slot.0 += e.n_nonzero_slack;
            slot.1 += e.m;
        }
        acc.into_iter()
            .map(|(m, (ones, total))| (m, ones as f64 / total as f64))
            .collect()
    }

    pub fn extend(&mut self, other: GridResult) {
        self.entries.extend(other.entries);
    }
}

/// Runs [`fqex`] over every `(n_1, m)` pair, starting each run from an
/// all-zero slack block. `split(n_1, seed)` produces the train/test pair; its
/// seed depends on `n_1` alone so every `m` sees the same split. Each cell's
/// training and annealing seeds derive from `(cfg.seed, n_1, m)`. Cells whose
/// training diverges, or whose split leaves no training data or fewer than
/// two test points, are kept as non-converged entries.
pub fn grid_test<F>(split: F, n_values: &[f64], m_values: &[usize], cfg: &SurrogateConfig) -> Result<GridResult>
where
    F: Fn(f64, u64) -> Result<(Dataset, Dataset)> + Sync,
{
    cfg.validate()?;
    let splits = n_values
        .iter()
        .map(|&n1| split(n1, derive_seed(cfg.seed, "split", &[n1.to_bits()])))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..n_values.len())
        .flat_map(|a| (0..m_values.len()).map(move |b| (a, b)))
        .collect();
    let entries = cells
        .par_iter()
        .map(|&(a, b)| {
            let (n1, m) = (n_values[a], m_values[b]);
            let seed = derive_seed(cfg.seed, "cell", &[n1.to_bits(), m as u64]);
            let cell_cfg = SurrogateConfig {
                m_slack: m,
                slack_init: None,
                seed,
                ..cfg.clone()
            };
            let (train, test) = &splits[a];
            let failed = GridEntry {
                n_1: n1,
                m,
                seed,
                train_loss: f64::NAN,
                test_mse: None,
                pearson: None,
                spearman: None,
                iterations: 0,
                n_nonzero_slack: 0,
                converged: false,
            };
            if train.is_empty() || test.len() < 2 {
                return Ok(failed);
            }
            match fqex(train, test, &cell_cfg) {
                Ok(out) => Ok(GridEntry {
                    train_loss: out.train_loss,
                    test_mse: Some(out.test_mse),
                    pearson: out.test_pearson,
                    spearman: out.test_spearman,
                    iterations: out.iterations,
                    n_nonzero_slack: count_nonzero_slack(&out.slack),
                    converged: out.train_loss.is_finite() && out.test_pearson.is_some() && out.test_spearman.is_some(),
                    ..failed
                }),
                Err(Error::Training(_)) => Ok(failed),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult { entries })
}
