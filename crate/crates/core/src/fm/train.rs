//! Mini-batch SGD on `MSE + beta1 |w|_1 + beta2 |V|_F^2`.
//!
//! The smooth part takes a plain gradient step; the L1 part is applied as a
//! soft-threshold after each step, so weights that the data does not support
//! settle at exactly zero. Training keeps the parameters with the lowest
//! full-batch objective seen, including the starting point.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{active_indices, FmModel, HofmModel};
use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::seed::{child_rng, derive_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Latent dimension for freshly initialized models.
    pub k: usize,
    pub learning_rate: f64,
    /// L1 weight on the linear coefficients.
    pub beta1: f64,
    /// Squared-Frobenius weight on the latent matrices.
    pub beta2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Standard deviation of the initial latent entries.
    pub init_scale: f64,
    /// Stop once the per-epoch objective improvement stays below this for
    /// `patience` consecutive epochs.
    pub tolerance: f64,
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 4,
            learning_rate: 0.003,
            beta1: 0.02,
            beta2: 0.003,
            epochs: 500,
            batch_size: 32,
            seed: 0,
            init_scale: 0.01,
            tolerance: 1e-6,
            patience: 10,
        }
    }
}

impl TrainConfig {
    /// Dose-response matrix completion: `k = 4`, `beta1 = 0.02`, `beta2 = 0.003`.
    pub fn dose_matrix() -> Self {
        TrainConfig::default()
    }

    /// Unseen-combination prediction: `k = 8`, `beta1 = 0.015`, `beta2 = 0.002`.
    pub fn unseen_combination() -> Self {
        TrainConfig {
            k: 8,
            beta1: 0.015,
            beta2: 0.002,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 >= 0.0 && self.beta2 >= 0.0 && self.beta1.is_finite() && self.beta2.is_finite()) {
            return bad("beta1 and beta2 must be non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be non-negative");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Gradient of the regularized objective with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FmGradient {
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

struct Batch<'a> {
    active: Vec<&'a [usize]>,
    targets: Vec<f64>,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn l1_subgradient(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// MSE part only, accumulated over active feature lists.
fn fm_data_gradient(model: &FmModel, batch: &Batch<'_>) -> FmGradient {
    let k = model.k();
    let mut g = FmGradient {
        w0: 0.0,
        w: vec![0.0; model.n_features()],
        v: vec![0.0; model.v.len()],
    };
    let scale = 2.0 / batch.targets.len() as f64;
    let mut sums = vec![0.0; k];
    for (act, &y) in batch.active.iter().zip(&batch.targets) {
        let r = model.predict_active(act) - y;
        let c = scale * r;
        g.w0 += c;
        sums.iter_mut().for_each(|s| *s = 0.0);
        for &i in *act {
            g.w[i] += c;
            for f in 0..k {
                sums[f] += model.v[i * k + f];
            }
        }
        for &i in *act {
            for f in 0..k {
                g.v[i * k + f] += c * (sums[f] - model.v[i * k + f]);
            }
        }
    }
    g
}

fn batch_of(data: &Dataset) -> (Vec<Vec<usize>>, Vec<f64>) {
    (
        data.inputs().iter().map(|x| active_indices(x)).collect(),
        data.targets().to_vec(),
    )
}

/// Gradient of `MSE + beta1 |w|_1 + beta2 |V|_F^2` over `batch`, using the
/// subgradient `sign(w)` (zero at zero) for the L1 term.
pub fn fm_gradient(model: &FmModel, batch: &Dataset, beta1: f64, beta2: f64) -> Result<FmGradient> {
    if batch.is_empty() {
        return Err(Error::validation("gradient of an empty batch"));
    }
    check_len(model.n_features(), batch.width().unwrap_or(0))?;
    let (active, targets) = batch_of(batch);
    let b = Batch {
        active: active.iter().map(Vec::as_slice).collect(),
        targets,
    };
    let mut g = fm_data_gradient(model, &b);
    for (gw, w) in g.w.iter_mut().zip(&model.w) {
        *gw += beta1 * l1_subgradient(*w);
    }
    for (gv, v) in g.v.iter_mut().zip(&model.v) {
        *gv += 2.0 * beta2 * v;
    }
    Ok(g)
}

/// `MSE + beta1 |w|_1 + beta2 |V|_F^2` on `data`.
pub fn regularized_loss(model: &FmModel, data: &Dataset, beta1: f64, beta2: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::validation("loss of an empty dataset"));
    }
    check_len(model.n_features(), data.width().unwrap_or(0))?;
    let (active, targets) = batch_of(data);
    Ok(objective(model, &active, &targets, beta1, beta2))
}

trait Trainable: Clone {
    fn predict_active(&self, active: &[usize]) -> f64;
    fn penalty(&self, beta1: f64, beta2: f64) -> f64;
    fn sgd_step(&mut self, batch: &Batch<'_>, cfg: &TrainConfig);
    fn finite(&self) -> bool;
}

impl Trainable for FmModel {
    fn predict_active(&self, active: &[usize]) -> f64 {
        FmModel::predict_active(self, active)
    }

    fn penalty(&self, beta1: f64, beta2: f64) -> f64 {
        beta1 * l1_norm(&self.w) + beta2 * sq_norm(&self.v)
    }

    fn sgd_step(&mut self, batch: &Batch<'_>, cfg: &TrainConfig) {
        let g = fm_data_gradient(self, batch);
        let lr = cfg.learning_rate;
        self.w0 -= lr * g.w0;
        for (w, gw) in self.w.iter_mut().zip(&g.w) {
            *w = soft_threshold(*w - lr * gw, lr * cfg.beta1);
        }
        for (v, gv) in self.v.iter_mut().zip(&g.v) {
            *v -= lr * (gv + 2.0 * cfg.beta2 * *v);
        }
    }

    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl Trainable for HofmModel {
    fn predict_active(&self, active: &[usize]) -> f64 {
        HofmModel::predict_active(self, active)
    }

    fn penalty(&self, beta1: f64, beta2: f64) -> f64 {
        beta1 * l1_norm(&self.w) + beta2 * (sq_norm(&self.v2) + sq_norm(&self.v3))
    }

    fn sgd_step(&mut self, batch: &Batch<'_>, cfg: &TrainConfig) {
        let k = self.k();
        let mut g0 = 0.0;
        let mut gw = vec![0.0; self.w.len()];
        let mut g2 = vec![0.0; self.v2.len()];
        let mut g3 = vec![0.0; self.v3.len()];
        let scale = 2.0 / batch.targets.len() as f64;
        let (mut s1, mut t1, mut t2) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        for (act, &y) in batch.active.iter().zip(&batch.targets) {
            let c = scale * (HofmModel::predict_active(self, act) - y);
            g0 += c;
            for f in 0..k {
                s1[f] = 0.0;
                t1[f] = 0.0;
                t2[f] = 0.0;
            }
            for &i in *act {
                gw[i] += c;
                for f in 0..k {
                    s1[f] += self.v2[i * k + f];
                    let b = self.v3[i * k + f];
                    t1[f] += b;
                    t2[f] += b * b;
                }
            }
            for &i in *act {
                for f in 0..k {
                    g2[i * k + f] += c * (s1[f] - self.v2[i * k + f]);
                    // d e3 / d b_i is e2 of the remaining entries.
                    let b = self.v3[i * k + f];
                    let rest = t1[f] - b;
                    g3[i * k + f] += c * 0.5 * (rest * rest - (t2[f] - b * b));
                }
            }
        }
        let lr = cfg.learning_rate;
        self.w0 -= lr * g0;
        for (w, g) in self.w.iter_mut().zip(&gw) {
            *w = soft_threshold(*w - lr * g, lr * cfg.beta1);
        }
        for (v, g) in self.v2.iter_mut().zip(&g2) {
            *v -= lr * (g + 2.0 * cfg.beta2 * *v);
        }
        for (v, g) in self.v3.iter_mut().zip(&g3) {
            *v -= lr * (g + 2.0 * cfg.beta2 * *v);
        }
    }

    fn finite(&self) -> bool {
        self.is_finite()
    }
}

fn objective<M: Trainable>(model: &M, active: &[Vec<usize>], targets: &[f64], beta1: f64, beta2: f64) -> f64 {
    let mse = active
        .iter()
        .zip(targets)
        .map(|(a, &y)| {
            let r = model.predict_active(a) - y;
            r * r
        })
        .sum::<f64>()
        / targets.len() as f64;
    mse + model.penalty(beta1, beta2)
}

fn train_loop<M: Trainable>(mut model: M, data: &Dataset, cfg: &TrainConfig) -> Result<M> {
    let (active, targets) = batch_of(data);
    let loss_of = |m: &M| objective(m, &active, &targets, cfg.beta1, cfg.beta2);

    let mut best = model.clone();
    let mut best_loss = loss_of(&model);
    if !best_loss.is_finite() {
        return Err(Error::Training("initial loss is not finite".into()));
    }
    let mut prev_loss = best_loss;
    let mut stalled = 0;
    let mut order: Vec<usize> = (0..targets.len()).collect();
    let mut rng = child_rng(cfg.seed, "fm-shuffle", &[]);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = Batch {
                active: chunk.iter().map(|&r| active[r].as_slice()).collect(),
                targets: chunk.iter().map(|&r| targets[r]).collect(),
            };
            model.sgd_step(&batch, cfg);
        }
        let loss = loss_of(&model);
        if !loss.is_finite() || !model.finite() {
            return Err(Error::Training(format!("loss diverged at epoch {epoch}")));
        }
        if loss < best_loss {
            best_loss = loss;
            best = model.clone();
        }
        if prev_loss - loss < cfg.tolerance {
            stalled += 1;
            if stalled >= cfg.patience.max(1) {
                break;
            }
        } else {
            stalled = 0;
        }
        prev_loss = loss;
    }
    Ok(best)
}

fn check_training_data(data: &Dataset, cfg: &TrainConfig) -> Result<usize> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("training data is empty"));
    }
    Ok(data.width().unwrap_or(0))
}

/// Trains a second-order model. With `warm_start` the optimization resumes
/// from its parameters; otherwise latent entries are drawn from
/// `N(0, init_scale)` seeded by `cfg.seed`.
pub fn fm_train(data: &Dataset, cfg: &TrainConfig, warm_start: Option<&FmModel>) -> Result<FmModel> {
    let n = check_training_data(data, cfg)?;
    let init = match warm_start {
        Some(m) => {
            check_len(n, m.n_features())?;
            m.validate()?;
            m.clone()
        }
        None => {
            let mut rng = crate::seed::rng_from(derive_seed(cfg.seed, "fm-init", &[]));
            FmModel::random(n, cfg.k, cfg.init_scale, &mut rng)?
        }
    };
    train_loop(init, data, cfg)
}

pub fn hofm_train(data: &Dataset, cfg: &TrainConfig, warm_start: Option<&HofmModel>) -> Result<HofmModel> {
    let n = check_training_data(data, cfg)?;
    let init = match warm_start {
        Some(m) => {
            check_len(n, m.n_features())?;
            m.validate()?;
            m.clone()
        }
        None => {
            let mut rng = crate::seed::rng_from(derive_seed(cfg.seed, "hofm-init", &[]));
            HofmModel::random(n, cfg.k, cfg.init_scale, &mut rng)?
        }
    };
    train_loop(init, data, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BinaryVector;

    fn bv(bits: &[u8]) -> BinaryVector {
        BinaryVector::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn bias_only_optimum_for_single_zero_sample() {
        let data = Dataset::new(vec![bv(&[0, 0, 0])], vec![2.5]).unwrap();
        let cfg = TrainConfig {
            beta1: 0.0,
            beta2: 0.0,
            learning_rate: 0.05,
            batch_size: 1,
            epochs: 2000,
            tolerance: 0.0,
            ..TrainConfig::default()
        };
        let m = fm_train(&data, &cfg, None).unwrap();
        assert!((m.w0 - 2.5).abs() < 1e-3, "w0 = {}", m.w0);
    }

    #[test]
    fn zero_residual_batch_has_zero_data_gradient() {
        let m = FmModel::from_parts(0.5, vec![1.0, -2.0], vec![vec![0.3], vec![0.7]]).unwrap();
        let xs = [bv(&[1, 0]), bv(&[1, 1]), bv(&[0, 0])];
        let ys: Vec<f64> = xs.iter().map(|x| m.predict(x).unwrap()).collect();
        let data = Dataset::new(xs.to_vec(), ys).unwrap();
        let g = fm_gradient(&m, &data, 0.0, 0.0).unwrap();
        assert_eq!(g.w0, 0.0);
        assert!(g.w.iter().chain(&g.v).all(|&v| v == 0.0));
    }

    #[test]
    fn bias_gradient_sign_on_one_sample() {
        // y_hat = 1 (bias), y = 4: d/dw0 (y_hat - y)^2 = 2 (y_hat - y) = -6.
        let mut m = FmModel::zeros(2, 1).unwrap();
        m.w0 = 1.0;
        let data = Dataset::new(vec![bv(&[0, 0])], vec![4.0]).unwrap();
        let g = fm_gradient(&m, &data, 0.0, 0.0).unwrap();
        assert_eq!(g.w0, -6.0);
    }

    #[test]
    fn l1_subgradient_is_zero_at_zero() {
        let m = FmModel::zeros(2, 1).unwrap();
        let data = Dataset::new(vec![bv(&[0, 0])], vec![0.0]).unwrap();
        let g = fm_gradient(&m, &data, 5.0, 0.0).unwrap();
        assert_eq!(g.w, vec![0.0, 0.0]);
    }

    #[test]
    fn empty_data_is_rejected() {
        let cfg = TrainConfig::default();
        assert!(matches!(
            fm_train(&Dataset::default(), &cfg, None),
            Err(Error::Validation(_))
        ));
        let m = FmModel::zeros(1, 1).unwrap();
        assert!(fm_gradient(&m, &Dataset::default(), 0.0, 0.0).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let xs: Vec<BinaryVector> = (0..16).map(|i| BinaryVector::from_index(i, 4)).collect();
        let ys: Vec<f64> = (0..16).map(|i| 1e3 * i as f64).collect();
        let data = Dataset::new(xs, ys).unwrap();
        let cfg = TrainConfig {
            learning_rate: 10.0,
            init_scale: 1.0,
            ..TrainConfig::default()
        };
        assert!(matches!(fm_train(&data, &cfg, None), Err(Error::Training(_))));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                beta1: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                k: 0,
                ..TrainConfig::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero() {
        assert_eq!(soft_threshold(1.0, 0.25), 0.75);
        assert_eq!(soft_threshold(-1.0, 0.25), -0.75);
        assert_eq!(soft_threshold(0.1, 0.25), 0.0);
    }
}
