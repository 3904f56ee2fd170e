//! Generators and independent reference implementations shared by the
//! integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use slackfm_core::{BinaryVector, Dataset, FmModel, HuboModel, QuboModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    slackfm_core::seed::rng_from(seed)
}

/// Dense QUBO with coefficients uniform in `[-1, 1]`.
pub fn random_qubo(n: usize, rng: &mut impl Rng) -> QuboModel {
    let mut q = QuboModel::new(n);
    for i in 0..n {
        q.add_linear(i, rng.random_range(-1.0..1.0)).unwrap();
        for j in i + 1..n {
            q.add_quadratic(i, j, rng.random_range(-1.0..1.0)).unwrap();
        }
    }
    q.add_constant(rng.random_range(-1.0..1.0));
    q
}

/// Random HUBO with `n_terms` terms of order 1..=max_order and coefficients
/// uniform in `[-2, 2]`.
pub fn random_hubo(n: usize, max_order: usize, n_terms: usize, rng: &mut impl Rng) -> HuboModel {
    let mut h = HuboModel::new(n);
    for _ in 0..n_terms {
        let order = rng.random_range(1..=max_order.min(n));
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..order {
            let pick = rng.random_range(k..n);
            idx.swap(k, pick);
        }
        idx.truncate(order);
        h.add_term(&idx, rng.random_range(-2.0..2.0)).unwrap();
    }
    h
}

pub fn all_inputs(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u64 << n).map(move |i| (0..n).map(|b| ((i >> b) & 1) as u8).collect())
}

/// Minimum energy and every minimizer, by enumeration.
pub fn enumerate_min(n: usize, f: impl Fn(&[u8]) -> f64) -> (f64, Vec<Vec<u8>>) {
    let mut best = f64::INFINITY;
    let mut argmins = Vec::new();
    for x in all_inputs(n) {
        let e = f(&x);
        if e < best - 1e-9 {
            best = e;
            argmins = vec![x];
        } else if (e - best).abs() <= 1e-9 {
            argmins.push(x);
        }
    }
    (best, argmins)
}

/// Pairwise double loop over the factorization machine definition.
pub fn naive_fm(m: &FmModel, x: &[u8]) -> f64 {
    let n = m.n_features();
    let mut y = m.w0;
    for i in 0..n {
        y += m.w[i] * f64::from(x[i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = m.v_row(i).iter().zip(m.v_row(j)).map(|(a, b)| a * b).sum();
            y += dot * f64::from(x[i] * x[j]);
        }
    }
    y
}

/// Regularized loss computed from the naive predictor.
pub fn naive_loss(m: &FmModel, data: &Dataset, beta1: f64, beta2: f64) -> f64 {
    let mse = data.iter().map(|(x, y)| (naive_fm(m, x) - y).powi(2)).sum::<f64>() / data.len() as f64;
    mse + beta1 * m.w.iter().map(|w| w.abs()).sum::<f64>() + beta2 * m.v.iter().map(|v| v * v).sum::<f64>()
}

pub fn random_bits(n: usize, rng: &mut impl Rng) -> BinaryVector {
    BinaryVector::new((0..n).map(|_| rng.random_range(0..2u8)).collect()).unwrap()
}

/// Dataset labelled by `f` on uniformly random inputs.
pub fn labelled(n: usize, count: usize, rng: &mut impl Rng, f: impl Fn(&[u8]) -> f64) -> Dataset {
    Dataset::from_pairs((0..count).map(|_| {
        let x = random_bits(n, rng);
        let y = f(&x);
        (x, y)
    }))
    .unwrap()
}
