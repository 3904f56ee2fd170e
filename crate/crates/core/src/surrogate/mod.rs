//! Surrogate-model loops over a queryable black box.
//!
//! * [`fqm`] stacks a shared slack block onto every sample, trains a
//!   factorization machine and extracts its QUBO.
//! * [`fmqubo_optimize`], [`hofmqubo_optimize`] and [`fmqubos_optimize`] are
//!   the train/solve/query optimization loops with a plain FM, a third-order
//!   FM with gadget reduction, and a slack-augmented FM respectively.
//! * [`fqex`] is the slack-augmented regression loop and [`grid_test`] runs
//!   it over a grid of training-set sizes and slack counts.

mod optimize;
mod regression;

use serde::{Deserialize, Serialize};

use crate::anneal::AnnealConfig;
use crate::binopt::BinaryVector;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fm::TrainConfig;

pub use optimize::{fmqubo_optimize, fmqubos_optimize, fqm, hofmqubo_optimize, OptimizeOutcome};
pub use regression::{count_nonzero_slack, fqex, grid_test, FqexOutcome, GridEntry, GridResult};

/// The system under study: sampled in batches, queried pointwise.
pub trait BlackBox: Sync {
    fn n_inputs(&self) -> usize;

    /// One-hot blocks of the input; every sampled input satisfies them.
    fn one_hot_groups(&self) -> Vec<Vec<usize>>;

    fn query(&self, x: &[u8]) -> Result<f64>;

    fn sample(&self, n: usize, seed: u64) -> Result<Dataset>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Number of slack variables appended to every input.
    pub m_slack: usize,
    /// Starting slack assignment; all zeros when absent.
    pub slack_init: Option<BinaryVector>,
    pub i_max: usize,
    pub epsilon: f64,
    /// Master seed; per-iteration training and annealing seeds derive from it.
    pub seed: u64,
    /// Retrain each iteration from the previous model's parameters.
    pub warm_start: bool,
    /// When the solver proposes an input already in the sample set, query a
    /// random unseen neighbour instead.
    pub skip_duplicates: bool,
    pub train: TrainConfig,
    pub anneal: AnnealConfig,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            m_slack: 0,
            slack_init: None,
            i_max: 20,
            epsilon: 1e-3,
            seed: 0,
            warm_start: true,
            skip_duplicates: false,
            train: TrainConfig::default(),
            anneal: AnnealConfig::default(),
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.i_max == 0 {
            return Err(Error::validation("i_max must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::validation("epsilon must be positive"));
        }
        if let Some(s) = &self.slack_init {
            if s.len() != self.m_slack {
                return Err(Error::Dimension {
                    expected: self.m_slack,
                    got: s.len(),
                });
            }
        }
        self.train.validate()
    }

    pub fn initial_slack(&self) -> BinaryVector {
        self.slack_init
            .clone()
            .unwrap_or_else(|| BinaryVector::zeros(self.m_slack))
    }

    /// Training settings of iteration `iteration`; the seed is derived from
    /// the master seed.
    pub fn train_for(&self, iteration: usize) -> TrainConfig {
        TrainConfig {
            seed: crate::seed::derive_seed(self.seed, "train", &[iteration as u64]),
            ..self.train.clone()
        }
    }

    /// Annealing settings of iteration `iteration` with the given groups.
    pub fn anneal_for(&self, iteration: usize, groups: Vec<Vec<usize>>) -> AnnealConfig {
        AnnealConfig {
            seed: crate::seed::derive_seed(self.seed, "anneal", &[iteration as u64]),
            one_hot_groups: groups,
            ..self.anneal.clone()
        }
    }
}

/// One loop iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Slack block the model of this iteration was trained with.
    pub slack: BinaryVector,
    /// Solver's input proposal (original variables only).
    pub x: BinaryVector,
    /// Minimum QUBO energy, i.e. the surrogate's prediction at `x`.
    pub predicted: f64,
    /// Black-box response at `x` (optimization loops only).
    pub observed: Option<f64>,
    /// Unregularized training MSE.
    pub train_loss: f64,
    pub test_mse: Option<f64>,
    pub test_pearson: Option<f64>,
    pub test_spearman: Option<f64>,
    pub n_samples: usize,
    /// HOFM loop only: every reduction slack equals the product it binds.
    pub reduction_consistent: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}
