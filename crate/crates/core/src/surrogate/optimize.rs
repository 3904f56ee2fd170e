use rand::Rng;

use super::{BlackBox, IterationRecord, IterationTrace, SurrogateConfig};
use crate::anneal::solve;
use crate::binopt::{reduce_hubo_to_qubo, BinaryVector, QuboModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fm::{fm_train, hofm_train, FmModel, TrainConfig};
use crate::metrics::mse_loss;
use crate::seed::{child_rng, derive_seed};

/// Result of an optimization loop. When the loop converged `x`, `y` and
/// `y_true` come from the final iteration; otherwise they come from the
/// iteration with the lowest observed response.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub x: BinaryVector,
    /// Surrogate prediction (minimum QUBO energy) at `x`.
    pub y: f64,
    /// Black-box response at `x`.
    pub y_true: f64,
    pub converged: bool,
    pub trace: IterationTrace,
    /// Final sample set, initial samples first.
    pub samples: Dataset,
    /// Slack block after the last solve (empty without slack variables).
    pub slack: BinaryVector,
}

/// Stacks `slack` onto every input, trains an FM on the extended data and
/// extracts the equivalent QUBO. Slack variables occupy the trailing block of
/// the QUBO's variables.
pub fn fqm(
    data: &Dataset,
    slack: &[u8],
    train: &TrainConfig,
    warm_start: Option<&FmModel>,
) -> Result<(FmModel, QuboModel)> {
    let extended = data.with_suffix(slack);
    let model = fm_train(&extended, train, warm_start)?;
    let qubo = model.to_qubo();
    Ok((model, qubo))
}

pub(crate) fn training_mse(model: &FmModel, data: &Dataset, slack: &[u8]) -> Result<f64> {
    let preds = data
        .inputs()
        .iter()
        .map(|x| model.predict(&x.concat(slack)))
        .collect::<Result<Vec<f64>>>()?;
    mse_loss(data.targets(), &preds)
}

fn check_groups_cover_inputs(groups: &[Vec<usize>], n_inputs: usize) -> Result<()> {
    if groups.iter().flatten().any(|&i| i >= n_inputs) {
        return Err(Error::validation("one-hot groups must lie within the original inputs"));
    }
    Ok(())
}

/// A random single move away from `x` that is not yet in `samples`, if one
/// turns up within a bounded number of tries.
fn unseen_neighbour(
    x: &BinaryVector,
    groups: &[Vec<usize>],
    samples: &Dataset,
    seed: u64,
    iteration: usize,
) -> Option<BinaryVector> {
    let n = x.len();
    let mut grouped = vec![false; n];
    groups.iter().flatten().for_each(|&i| grouped[i] = true);
    let free: Vec<usize> = (0..n).filter(|&i| !grouped[i]).collect();
    let movable: Vec<&Vec<usize>> = groups.iter().filter(|g| g.len() > 1).collect();
    let n_moves = free.len() + movable.len();
    if n_moves == 0 {
        return None;
    }
    let mut rng = child_rng(seed, "perturb", &[iteration as u64]);
    for _ in 0..100 {
        let mut bits = x.to_vec();
        let pick = rng.random_range(0..n_moves);
        if pick < free.len() {
            bits[free[pick]] ^= 1;
        } else {
            let g = movable[pick - free.len()];
            let to = g[rng.random_range(0..g.len())];
            g.iter().for_each(|&i| bits[i] = 0);
            bits[to] = 1;
        }
        if !samples.contains_input(&bits) {
            return BinaryVector::new(bits).ok();
        }
    }
    None
}

struct Proposal {
    x: BinaryVector,
    predicted: f64,
}

/// Applies the duplicate policy to the solver's proposal. `slack` is the
/// trailing block used to re-evaluate the surrogate at a replacement point.
fn propose(
    z: &BinaryVector,
    energy: f64,
    n_inputs: usize,
    qubo: &QuboModel,
    samples: &Dataset,
    cfg: &SurrogateConfig,
    groups: &[Vec<usize>],
    iteration: usize,
) -> Result<Proposal> {
    let x = BinaryVector::new(z[..n_inputs].to_vec())?;
    if cfg.skip_duplicates && samples.contains_input(&x) {
        if let Some(alt) = unseen_neighbour(&x, groups, samples, cfg.seed, iteration) {
            let predicted = qubo.energy(&alt.concat(&z[n_inputs..]))?;
            return Ok(Proposal { x: alt, predicted });
        }
    }
    Ok(Proposal { x, predicted: energy })
}

fn finish(trace: IterationTrace, converged: bool, samples: Dataset, slack: BinaryVector) -> OptimizeOutcome {
    let pick = if converged {
        trace.records.len() - 1
    } else {
        let mut best = 0;
        for (i, r) in trace.records.iter().enumerate() {
            if r.observed.unwrap_or(f64::INFINITY) < trace.records[best].observed.unwrap_or(f64::INFINITY) {
                best = i;
            }
        }
        best
    };
    let r = &trace.records[pick];
    OptimizeOutcome {
        x: r.x.clone(),
        y: r.predicted,
        y_true: r.observed.unwrap_or(f64::NAN),
        converged,
        samples,
        slack,
        trace,
    }
}

fn initial_samples(bb: &dyn BlackBox, n: usize, cfg: &SurrogateConfig) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::validation("initial sample size must be at least 1"));
    }
    cfg.validate()?;
    bb.sample(n, derive_seed(cfg.seed, "sample", &[]))
}

/// Train an FM on the sample set, minimize its QUBO, query the black box at
/// the minimizer; stop once prediction and response agree within `epsilon`,
/// otherwise add the new sample and retrain.
pub fn fmqubo_optimize(bb: &dyn BlackBox, n: usize, cfg: &SurrogateConfig) -> Result<OptimizeOutcome> {
    let mut samples = initial_samples(bb, n, cfg)?;
    let groups = bb.one_hot_groups();
    check_groups_cover_inputs(&groups, bb.n_inputs())?;
    let mut trace = IterationTrace::default();
    let mut model = fm_train(&samples, &cfg.train_for(0), None)?;
    let mut converged = false;

    for i in 0..cfg.i_max {
        let qubo = model.to_qubo();
        let sol = solve(&qubo, &cfg.anneal_for(i, groups.clone()))?;
        let p = propose(
            &sol.best_x,
            sol.best_energy,
            bb.n_inputs(),
            &qubo,
            &samples,
            cfg,
            &groups,
            i,
        )?;
        let observed = bb.query(&p.x)?;
        trace.records.push(IterationRecord {
            iteration: i,
            slack: BinaryVector::zeros(0),
            x: p.x.clone(),
            predicted: p.predicted,
            observed: Some(observed),
            train_loss: training_mse(&model, &samples, &[])?,
            test_mse: None,
            test_pearson: None,
            test_spearman: None,
            n_samples: samples.len(),
            reduction_consistent: None,
        });
        if (observed - p.predicted).abs() < cfg.epsilon {
            converged = true;
            break;
        }
        samples.push(p.x, observed)?;
        let warm = cfg.warm_start.then_some(&model);
        model = fm_train(&samples, &cfg.train_for(i + 1), warm)?;
    }
    Ok(finish(trace, converged, samples, BinaryVector::zeros(0)))
}

/// As [`fmqubo_optimize`] with a third-order FM; its HUBO is reduced to a
/// QUBO by pairwise substitution and the reduction slacks are dropped before
/// querying.
pub fn hofmqubo_optimize(bb: &dyn BlackBox, n: usize, cfg: &SurrogateConfig) -> Result<OptimizeOutcome> {
    let mut samples = initial_samples(bb, n, cfg)?;
    let groups = bb.one_hot_groups();
    check_groups_cover_inputs(&groups, bb.n_inputs())?;
    let mut trace = IterationTrace::default();
    let mut model = hofm_train(&samples, &cfg.train_for(0), None)?;
    let mut converged = false;

    for i in 0..cfg.i_max {
        let reduction = reduce_hubo_to_qubo(&model.to_hubo(), None)?;
        let sol = solve(&reduction.qubo, &cfg.anneal_for(i, groups.clone()))?;
        let consistent = reduction.bindings_satisfied(&sol.best_x);
        let mut x = reduction.project(&sol.best_x)?;
        let mut predicted = sol.best_energy;
        if cfg.skip_duplicates && samples.contains_input(&x) {
            if let Some(alt) = unseen_neighbour(&x, &groups, &samples, cfg.seed, i) {
                predicted = model.predict(&alt)?;
                x = alt;
            }
        }
        let observed = bb.query(&x)?;
        let preds = samples
            .inputs()
            .iter()
            .map(|s| model.predict(s))
            .collect::<Result<Vec<_>>>()?;
        trace.records.push(IterationRecord {
            iteration: i,
            slack: BinaryVector::zeros(0),
            x: x.clone(),
            predicted,
            observed: Some(observed),
            train_loss: mse_loss(samples.targets(), &preds)?,
            test_mse: None,
            test_pearson: None,
            test_spearman: None,
            n_samples: samples.len(),
            reduction_consistent: Some(consistent),
        });
        if (observed - predicted).abs() < cfg.epsilon {
            converged = true;
            break;
        }
        samples.push(x, observed)?;
        let warm = cfg.warm_start.then_some(&model);
        model = hofm_train(&samples, &cfg.train_for(i + 1), warm)?;
    }
    Ok(finish(trace, converged, samples, BinaryVector::zeros(0)))
}

/// The slack-augmented loop: each iteration trains on `[x, s]` with the
/// current shared slack block `s`, minimizes the QUBO over inputs and slacks
/// jointly, carries the trailing `m` solution bits forward as the new `s`
/// and queries the black box at the leading bits.
pub fn fmqubos_optimize(bb: &dyn BlackBox, n: usize, cfg: &SurrogateConfig) -> Result<OptimizeOutcome> {
    let mut samples = initial_samples(bb, n, cfg)?;
    let groups = bb.one_hot_groups();
    let n_inputs = bb.n_inputs();
    check_groups_cover_inputs(&groups, n_inputs)?;
    let mut slack = cfg.initial_slack();
    let mut trace = IterationTrace::default();
    let mut previous: Option<FmModel> = None;
    let mut converged = false;

    for i in 0..cfg.i_max {
        let warm = if cfg.warm_start { previous.as_ref() } else { None };
        let (model, qubo) = fqm(&samples, &slack, &cfg.train_for(i), warm)?;
        let sol = solve(&qubo, &cfg.anneal_for(i, groups.clone()))?;
        let next_slack = BinaryVector::new(sol.best_x[n_inputs..].to_vec())?;
        let p = propose(&sol.best_x, sol.best_energy, n_inputs, &qubo, &samples, cfg, &groups, i)?;
        let observed = bb.query(&p.x)?;
        trace.records.push(IterationRecord {
            iteration: i,
            slack: slack.clone(),
            x: p.x.clone(),
            predicted: p.predicted,
            observed: Some(observed),
            train_loss: training_mse(&model, &samples, &slack)?,
            test_mse: None,
            test_pearson: None,
            test_spearman: None,
            n_samples: samples.len(),
            reduction_consistent: None,
        });
        slack = next_slack;
        if (observed - p.predicted).abs() < cfg.epsilon {
            converged = true;
            break;
        }
        samples.push(p.x, observed)?;
        previous = Some(model);
    }
    Ok(finish(trace, converged, samples, slack))
}
