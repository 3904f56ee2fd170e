mod common;

use common::{labelled, naive_fm, naive_loss, random_bits, rng};
use proptest::prelude::*;
use slackfm_core::fm::{fm_gradient, fm_train, hofm_train};
use slackfm_core::{FmModel, HofmModel, TrainConfig};

#[test]
fn hand_example_and_extraction() {
    let m = FmModel::from_parts(0.0, vec![1.0, 1.0], vec![vec![2.0], vec![3.0]]).unwrap();
    assert_eq!(m.predict(&[1, 1]).unwrap(), 8.0);
    assert_eq!(m.predict(&[0, 0]).unwrap(), 0.0);
    let q = m.to_qubo();
    assert_eq!(q.quadratic_coeff(0, 1), 6.0);
    assert_eq!((q.linear_coeff(0), q.linear_coeff(1)), (1.0, 1.0));
}

#[test]
fn hofm_single_triple() {
    let mut h = HofmModel::zeros(3, 1).unwrap();
    h.v3 = vec![1.0, 2.0, 3.0];
    assert_eq!(h.predict(&[1, 1, 1]).unwrap(), 6.0);
    assert_eq!(h.to_hubo().coeff(&[0, 1, 2]), 6.0);
}

#[test]
fn extraction_is_exact_on_every_input() {
    let mut r = rng(10);
    for n in [1, 5, 12] {
        let m = FmModel::random(n, 3, 1.0, &mut r).unwrap();
        let mut m = m;
        m.w0 = 0.7;
        m.w = (0..n).map(|i| i as f64 * 0.1 - 0.3).collect();
        let q = m.to_qubo();
        for x in common::all_inputs(n) {
            assert!((q.energy(&x).unwrap() - m.predict(&x).unwrap()).abs() < 1e-9);
        }
    }
    for n in [3, 10] {
        let h = HofmModel::random(n, 2, 1.0, &mut r).unwrap();
        let hubo = h.to_hubo();
        for x in common::all_inputs(n) {
            assert!((hubo.energy(&x).unwrap() - h.predict(&x).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let (beta1, beta2, h) = (0.02, 0.003, 1e-5);
    let mut r = rng(11);
    for case in 0..10u64 {
        let n = 3 + case as usize % 5;
        let mut m = FmModel::random(n, 1 + case as usize % 3, 0.5, &mut r).unwrap();
        m.w0 = 0.3;
        m.w = (0..n).map(|i| 0.2 + 0.1 * i as f64).collect();
        let data = labelled(n, 12, &mut r, |x| x.iter().map(|&b| f64::from(b)).sum::<f64>().sin());
        let g = fm_gradient(&m, &data, beta1, beta2).unwrap();

        let fd = |apply: &dyn Fn(&mut FmModel, f64)| {
            let (mut p, mut q) = (m.clone(), m.clone());
            apply(&mut p, h);
            apply(&mut q, -h);
            (naive_loss(&p, &data, beta1, beta2) - naive_loss(&q, &data, beta1, beta2)) / (2.0 * h)
        };
        let check = |analytic: f64, numeric: f64| {
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
            assert!(rel < 1e-4, "case {case}: analytic {analytic} vs fd {numeric}");
        };
        check(g.w0, fd(&|p, d| p.w0 += d));
        for i in 0..n {
            check(g.w[i], fd(&|p, d| p.w[i] += d));
        }
        for c in 0..m.v.len() {
            check(g.v[c], fd(&|p, d| p.v[c] += d));
        }
    }
}

#[test]
fn planted_model_is_recovered() {
    let mut r = rng(12);
    let planted = {
        let mut p = FmModel::random(8, 2, 0.7, &mut r).unwrap();
        p.w0 = 0.5;
        p.w = vec![0.4, -0.3, 0.2, 0.0, -0.5, 0.1, 0.3, -0.2];
        p
    };
    let data = labelled(8, 200, &mut r, |x| planted.predict(x).unwrap());
    let cfg = TrainConfig {
        k: 2,
        learning_rate: 0.02,
        beta1: 0.0,
        beta2: 0.0,
        epochs: 3000,
        batch_size: 16,
        init_scale: 0.1,
        tolerance: 1e-12,
        patience: 50,
        seed: 3,
    };
    let m = fm_train(&data, &cfg, None).unwrap();
    let mse = data
        .iter()
        .map(|(x, y)| (m.predict(x).unwrap() - y).powi(2))
        .sum::<f64>()
        / 200.0;
    assert!(mse < 1e-2, "mse {mse}");
}

#[test]
fn strong_l1_zeroes_linear_weights() {
    let mut r = rng(13);
    let data = labelled(6, 50, &mut r, |x| f64::from(x[0]) * 3.0 - f64::from(x[3]));
    let cfg = TrainConfig {
        beta1: 1e3,
        epochs: 50,
        ..TrainConfig::default()
    };
    let m = fm_train(&data, &cfg, None).unwrap();
    assert!(m.w.iter().all(|w| w.abs() < 1e-3), "{:?}", m.w);
}

#[test]
fn l1_monotonicity_over_beta1_grid() {
    let mut r = rng(14);
    let data = labelled(8, 120, &mut r, |x| {
        (0..8).map(|i| f64::from(x[i]) * (i as f64 - 3.5) * 0.3).sum::<f64>() + f64::from(x[0] * x[1])
    });
    let l1 = |beta1: f64| {
        let cfg = TrainConfig {
            beta1,
            learning_rate: 0.01,
            epochs: 800,
            seed: 5,
            ..TrainConfig::default()
        };
        fm_train(&data, &cfg, None)
            .unwrap()
            .w
            .iter()
            .map(|w| w.abs())
            .sum::<f64>()
    };
    let norms: Vec<f64> = [0.0, 0.05, 0.5].into_iter().map(l1).collect();
    assert!(norms[1] <= norms[0] + 1e-6 && norms[2] <= norms[1] + 1e-6, "{norms:?}");
}

#[test]
fn training_is_deterministic_and_never_worse_than_start() {
    let mut r = rng(15);
    let data = labelled(10, 80, &mut r, |x| {
        x.iter().map(|&b| f64::from(b)).product::<f64>() + f64::from(x[2])
    });
    let cfg = TrainConfig {
        epochs: 40,
        seed: 9,
        ..TrainConfig::default()
    };
    let a = fm_train(&data, &cfg, None).unwrap();
    let b = fm_train(&data, &cfg, None).unwrap();
    assert_eq!(a, b);
    let start = FmModel::zeros(10, cfg.k).unwrap();
    let warm = fm_train(&data, &cfg, Some(&start)).unwrap();
    assert!(naive_loss(&warm, &data, cfg.beta1, cfg.beta2) <= naive_loss(&start, &data, cfg.beta1, cfg.beta2) + 1e-12);

    let h1 = hofm_train(&data, &cfg, None).unwrap();
    let h2 = hofm_train(&data, &cfg, None).unwrap();
    assert_eq!(h1, h2);
}

#[test]
fn json_roundtrip() {
    let m = FmModel::random(5, 3, 1.0, &mut rng(16)).unwrap();
    assert_eq!(FmModel::from_json(&m.to_json()).unwrap(), m);
    let h = HofmModel::random(4, 2, 1.0, &mut rng(17)).unwrap();
    assert_eq!(HofmModel::from_json(&h.to_json()).unwrap(), h);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_prediction_matches_pairwise_sum(n in 1usize..=64, k in 1usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut m = FmModel::random(n, k, 1.0, &mut r).unwrap();
        m.w = (0..n).map(|i| (i as f64).cos()).collect();
        let x = random_bits(n, &mut r);
        prop_assert!((m.predict(&x).unwrap() - naive_fm(&m, &x)).abs() < 1e-9);
    }

    #[test]
    fn hofm_without_cubic_block_is_an_fm(n in 1usize..=12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let fm = FmModel::random(n, 2, 1.0, &mut r).unwrap();
        let h = HofmModel::from_fm(&fm);
        let x = random_bits(n, &mut r);
        prop_assert!((h.predict(&x).unwrap() - fm.predict(&x).unwrap()).abs() < 1e-12);
    }
}
