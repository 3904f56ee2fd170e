mod common;

use common::{enumerate_min, rng};
use rand::Rng;
use slackfm_core::binopt::HuboModel;
use slackfm_core::data::make_synthetic_blackbox;
use slackfm_core::surrogate::{fmqubo_optimize, fmqubos_optimize, fqex, fqm, grid_test, hofmqubo_optimize, BlackBox};
use slackfm_core::{AnnealConfig, BinaryVector, Dataset, FmModel, HofmModel, Result, SurrogateConfig, TrainConfig};

/// Noise-free black box backed by a polynomial, sampled uniformly over all
/// inputs.
struct Planted(HuboModel);

impl BlackBox for Planted {
    fn n_inputs(&self) -> usize {
        self.0.n_vars()
    }
    fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        Vec::new()
    }
    fn query(&self, x: &[u8]) -> Result<f64> {
        self.0.energy(x)
    }
    fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut r = rng(seed);
        let n_vars = self.n_inputs();
        Dataset::from_pairs((0..n).map(|_| {
            let x = common::random_bits(n_vars, &mut r);
            let y = self.0.energy(&x).unwrap();
            (x, y)
        }))
    }
}

fn fast_train(k: usize) -> TrainConfig {
    TrainConfig {
        k,
        learning_rate: 0.02,
        beta1: 0.0,
        beta2: 0.0,
        epochs: 1500,
        batch_size: 16,
        init_scale: 0.1,
        tolerance: 1e-12,
        patience: 30,
        seed: 0,
    }
}

fn small_anneal() -> AnnealConfig {
    AnnealConfig {
        num_reads: 100,
        sweeps_per_read: 200,
        ..AnnealConfig::default()
    }
}

fn config(m: usize, k: usize, epsilon: f64, i_max: usize) -> SurrogateConfig {
    SurrogateConfig {
        m_slack: m,
        i_max,
        epsilon,
        seed: 4,
        train: fast_train(k),
        anneal: small_anneal(),
        ..SurrogateConfig::default()
    }
}

fn planted_fm(n: usize, seed: u64) -> FmModel {
    let mut r = rng(seed);
    let mut m = FmModel::random(n, 2, 0.8, &mut r).unwrap();
    m.w = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    m
}

#[test]
fn fqm_stacks_slack_as_trailing_block() {
    let data = Planted(planted_fm(3, 1).to_hubo()).sample(30, 2).unwrap();
    let cfg = fast_train(2);
    let (model, qubo) = fqm(&data, &[0, 0], &cfg, None).unwrap();
    assert_eq!((model.n_features(), qubo.n_vars()), (5, 5));
    for z in common::all_inputs(5) {
        assert!((model.predict(&z).unwrap() - qubo.energy(&z).unwrap()).abs() < 1e-9);
    }
    let (plain, q0) = fqm(&data, &[], &cfg, None).unwrap();
    assert_eq!(plain, slackfm_core::fm::fm_train(&data, &cfg, None).unwrap());
    assert_eq!(q0, plain.to_qubo());
}

#[test]
fn fmqubo_finds_planted_quadratic_optimum() {
    let planted = planted_fm(8, 5);
    let bb = Planted(planted.to_hubo());
    let out = fmqubo_optimize(&bb, 120, &config(0, 2, 0.05, 20)).unwrap();
    assert!(
        out.converged,
        "{:?}",
        out.trace
            .records
            .iter()
            .map(|r| (r.predicted, r.observed))
            .collect::<Vec<_>>()
    );
    assert!((out.y_true - out.y).abs() < 0.05);
    let (min, _) = enumerate_min(8, |x| planted.predict(x).unwrap());
    assert!((out.y_true - min).abs() < 1e-9, "{} vs {min}", out.y_true);
}

#[test]
fn infinite_tolerance_stops_after_one_iteration() {
    let bb = Planted(planted_fm(6, 6).to_hubo());
    let out = fmqubo_optimize(&bb, 20, &config(0, 2, f64::INFINITY, 20)).unwrap();
    assert!(out.converged);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn sample_set_grows_by_one_per_unconverged_iteration() {
    let bb = Planted(planted_fm(6, 7).to_hubo());
    let out = fmqubo_optimize(&bb, 10, &config(0, 2, 1e-12, 4)).unwrap();
    let sizes: Vec<usize> = out.trace.records.iter().map(|r| r.n_samples).collect();
    assert_eq!(sizes, vec![10, 11, 12, 13]);
    assert_eq!(out.samples.len(), 10 + out.trace.len() - usize::from(out.converged));
}

#[test]
fn hofmqubo_finds_planted_cubic_optimum() {
    let mut r = rng(8);
    let mut planted = HofmModel::random(6, 1, 1.0, &mut r).unwrap();
    planted.w = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
    let bb = Planted(planted.to_hubo());
    let out = hofmqubo_optimize(&bb, 64, &config(0, 2, 0.05, 20)).unwrap();
    let (min, _) = enumerate_min(6, |x| planted.predict(x).unwrap());
    assert!(out.converged);
    assert!((out.y_true - min).abs() < 1e-9, "{} vs {min}", out.y_true);
    assert!(out.trace.records.iter().all(|r| r.reduction_consistent == Some(true)));
}

#[test]
fn fmqubos_without_slack_reproduces_fmqubo() {
    let bb = make_synthetic_blackbox(3, 3, &[1, 2, 3], 0.0, 9).unwrap();
    let cfg = config(0, 2, 1e-3, 6);
    let a = fmqubo_optimize(&bb, 15, &cfg).unwrap();
    let b = fmqubos_optimize(&bb, 15, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!((a.x, a.y, a.y_true), (b.x, b.y, b.y_true));
}

#[test]
fn fmqubos_keeps_groups_on_inputs_and_converges_soundly() {
    let bb = make_synthetic_blackbox(3, 3, &[1, 2, 3], 0.0, 10).unwrap();
    let cfg = config(4, 2, 0.05, 10);
    let out = fmqubos_optimize(&bb, 15, &cfg).unwrap();
    for r in &out.trace.records {
        assert_eq!(r.slack.len(), 4);
        assert!(slackfm_core::anneal::groups_satisfied(&r.x, &bb.one_hot_groups()));
    }
    if out.converged {
        assert!((out.y_true - out.y).abs() < cfg.epsilon);
    }
}

#[test]
fn fqex_single_iteration_is_one_training_run() {
    let bb = Planted(planted_fm(6, 11).to_hubo());
    let train = bb.sample(60, 1).unwrap();
    let test = bb.sample(20, 2).unwrap();
    let cfg = config(0, 2, 1e-9, 1);
    let out = fqex(&train, &test, &cfg).unwrap();
    assert_eq!(out.iterations, 1);
    let model = slackfm_core::fm::fm_train(&train, &cfg.train_for(0), None).unwrap();
    assert_eq!(out.model, model);
}

#[test]
fn fqex_fits_planted_pairwise_model_for_any_slack_count() {
    let bb = Planted(planted_fm(8, 12).to_hubo());
    let train = bb.sample(200, 1).unwrap();
    let test = bb.sample(60, 2).unwrap();
    for m in [0, 4] {
        let out = fqex(&train, &test, &config(m, 2, 1e-3, 3)).unwrap();
        assert!(out.test_mse < 1e-2, "m={m}: {}", out.test_mse);
        assert_eq!(out.slack.len(), m);
    }
}

#[test]
fn grid_has_one_entry_per_cell_and_is_deterministic() {
    let bb = make_synthetic_blackbox(3, 3, &[1, 2], 0.1, 13).unwrap();
    let split = |n1: f64, seed: u64| -> Result<(Dataset, Dataset)> {
        Ok((bb.sample(n1 as usize, seed)?, bb.sample(20, seed ^ 1)?))
    };
    let cfg = config(0, 2, 1e-3, 2);
    let g = grid_test(split, &[20.0, 30.0], &[0, 2, 4], &cfg).unwrap();
    assert_eq!(g.entries.len(), 6);
    assert_eq!(g, grid_test(split, &[20.0, 30.0], &[0, 2, 4], &cfg).unwrap());
    let one = grid_test(split, &[20.0], &[2], &cfg).unwrap();
    assert_eq!(one.entries[0], g.entries[1]);
    let fractions = g.nonzero_slack_fraction_by_m();
    assert!(fractions.keys().all(|&m| m > 0));
    assert!(fractions.values().all(|f| (0.0..=1.0).contains(f)));
}

#[test]
fn slack_bits_are_recorded_as_vectors() {
    let v = BinaryVector::new(vec![1, 0, 1, 1]).unwrap();
    assert_eq!(slackfm_core::surrogate::count_nonzero_slack(&v), 3);
}
