//! Factorization machines.
//!
//! [`FmModel`] is the second-order model
//! `y(x) = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j`, evaluated in
//! `O(k n)` through `1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i]`.
//! [`HofmModel`] adds a third-order block
//! `sum_{a<b<c} <u_a, u_b, u_c> x_a x_b x_c` with its own latent matrix.
//!
//! Inputs are binary, so only the active (set) features contribute and all
//! evaluation works over active index lists.

mod hofm;
mod train;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::binopt::{HuboModel, QuboModel};
use crate::error::{check_len, Error, Result};

pub use hofm::HofmModel;
pub use train::{fm_gradient, fm_train, hofm_train, regularized_loss, FmGradient, TrainConfig};

pub const FM_FORMAT: &str = "slackfm.fm/1";

pub(crate) fn active_indices(x: &[u8]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter_map(|(i, &b)| (b == 1).then_some(i))
        .collect()
}

pub(crate) fn normal_matrix<R: Rng>(rows: usize, k: usize, scale: f64, rng: &mut R) -> Result<Vec<f64>> {
    if scale == 0.0 {
        return Ok(vec![0.0; rows * k]);
    }
    let dist = Normal::new(0.0, scale).map_err(|e| Error::validation(format!("init_scale {scale}: {e}")))?;
    Ok((0..rows * k).map(|_| dist.sample(rng)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmModel {
    n_features: usize,
    k: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    /// Row-major `n_features x k`; row `i` is `v_i`.
    pub v: Vec<f64>,
}

impl FmModel {
    pub fn zeros(n_features: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("latent dimension k must be at least 1"));
        }
        Ok(FmModel {
            n_features,
            k,
            w0: 0.0,
            w: vec![0.0; n_features],
            v: vec![0.0; n_features * k],
        })
    }

    /// Zero bias and linear weights; latent entries drawn from `N(0, scale)`.
    pub fn random<R: Rng>(n_features: usize, k: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let mut m = FmModel::zeros(n_features, k)?;
        m.v = normal_matrix(n_features, k, scale, rng)?;
        Ok(m)
    }

    pub fn from_parts(w0: f64, w: Vec<f64>, v_rows: Vec<Vec<f64>>) -> Result<Self> {
        check_len(w.len(), v_rows.len())?;
        let k = v_rows.first().map(Vec::len).unwrap_or(1);
        let mut m = FmModel::zeros(w.len(), k)?;
        m.w0 = w0;
        m.w = w;
        for (i, row) in v_rows.iter().enumerate() {
            check_len(k, row.len())?;
            m.v[i * k..(i + 1) * k].copy_from_slice(row);
        }
        m.validate()?;
        Ok(m)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_row(&self, i: usize) -> &[f64] {
        &self.v[i * self.k..(i + 1) * self.k]
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::validation("latent dimension k must be at least 1"));
        }
        check_len(self.n_features, self.w.len())?;
        check_len(self.n_features * self.k, self.v.len())?;
        if !self.is_finite() {
            return Err(Error::validation("model has non-finite parameters"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w.iter().all(|v| v.is_finite()) && self.v.iter().all(|v| v.is_finite())
    }

    pub fn predict(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_features, x.len())?;
        Ok(self.predict_active(&active_indices(x)))
    }

    pub(crate) fn predict_active(&self, active: &[usize]) -> f64 {
        let k = self.k;
        let mut y = self.w0;
        for &i in active {
            y += self.w[i];
        }
        for f in 0..k {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for &i in active {
                let v = self.v[i * k + f];
                sum += v;
                sum_sq += v * v;
            }
            y += 0.5 * (sum * sum - sum_sq);
        }
        y
    }

    pub fn predict_many<'a, I>(&self, xs: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = &'a [u8]>,
    {
        xs.into_iter().map(|x| self.predict(x)).collect()
    }

    /// `<v_i, v_j>`.
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        self.v_row(i).iter().zip(self.v_row(j)).map(|(a, b)| a * b).sum()
    }

    /// The QUBO whose energy equals the model's prediction on every input:
    /// `Q_ij = <v_i, v_j>`, `Q_i = w_i`, `c0 = w0`.
    pub fn to_qubo(&self) -> QuboModel {
        let n = self.n_features;
        let mut q = QuboModel::new(n);
        q.add_constant(self.w0);
        for i in 0..n {
            q.add_linear(i, self.w[i]).expect("index in range");
            for j in i + 1..n {
                q.add_quadratic(i, j, self.interaction(i, j)).expect("index in range");
            }
        }
        q
    }

    /// The same model viewed as a HUBO of order two.
    pub fn to_hubo(&self) -> HuboModel {
        HuboModel::from(&self.to_qubo())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FmRecord::from(self)).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: FmRecord = serde_json::from_str(s)?;
        rec.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct FmRecord {
    format: String,
    n: usize,
    k: usize,
    w0: f64,
    w: Vec<f64>,
    v: Vec<Vec<f64>>,
}

impl From<&FmModel> for FmRecord {
    fn from(m: &FmModel) -> Self {
        FmRecord {
            format: FM_FORMAT.to_string(),
            n: m.n_features,
            k: m.k,
            w0: m.w0,
            w: m.w.clone(),
            v: (0..m.n_features).map(|i| m.v_row(i).to_vec()).collect(),
        }
    }
}

impl TryFrom<FmRecord> for FmModel {
    type Error = Error;

    fn try_from(rec: FmRecord) -> Result<Self> {
        if rec.format != FM_FORMAT {
            return Err(Error::validation(format!(
                "unsupported model format `{}` (expected `{FM_FORMAT}`)",
                rec.format
            )));
        }
        check_len(rec.n, rec.w.len())?;
        let mut m = FmModel::zeros(rec.n, rec.k)?;
        m.w0 = rec.w0;
        m.w = rec.w;
        check_len(rec.n, rec.v.len())?;
        for (i, row) in rec.v.iter().enumerate() {
            check_len(rec.k, row.len())?;
            m.v[i * rec.k..(i + 1) * rec.k].copy_from_slice(row);
        }
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_feature_model() -> FmModel {
        FmModel::from_parts(0.0, vec![1.0, 1.0], vec![vec![2.0], vec![3.0]]).unwrap()
    }

    #[test]
    fn zero_input_returns_bias() {
        let mut m = two_feature_model();
        m.w0 = -1.25;
        assert_eq!(m.predict(&[0, 0]).unwrap(), -1.25);
    }

    #[test]
    fn hand_evaluated_prediction() {
        assert_eq!(two_feature_model().predict(&[1, 1]).unwrap(), 8.0);
    }

    #[test]
    fn extraction_of_hand_model() {
        let q = two_feature_model().to_qubo();
        assert_eq!(q.quadratic_coeff(0, 1), 6.0);
        assert_eq!(q.linear_coeff(0), 1.0);
        assert_eq!(q.linear_coeff(1), 1.0);
        assert_eq!(q.constant(), 0.0);
    }

    #[test]
    fn zero_model_extracts_to_bias_only() {
        let mut m = FmModel::zeros(4, 2).unwrap();
        m.w0 = 0.5;
        let q = m.to_qubo();
        assert!(q.linear().is_empty() && q.quadratic().is_empty());
        assert_eq!(q.constant(), 0.5);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(FmModel::zeros(3, 0).is_err());
        assert!(two_feature_model().predict(&[1]).is_err());
        assert!(FmModel::from_parts(0.0, vec![1.0], vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn json_roundtrip_and_format_tag() {
        let m = two_feature_model();
        let s = m.to_json();
        assert!(s.contains(FM_FORMAT));
        assert_eq!(FmModel::from_json(&s).unwrap(), m);
        let tampered = s.replace(FM_FORMAT, "other/9");
        assert!(FmModel::from_json(&tampered).is_err());
    }
}
