use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{active_indices, normal_matrix, FmModel};
use crate::binopt::HuboModel;
use crate::error::{check_len, Error, Result};

pub const HOFM_FORMAT: &str = "slackfm.hofm/1";

/// Third-order factorization machine. `v2` drives pairwise terms and `v3`
/// drives the three-way terms `sum_f v3[a,f] v3[b,f] v3[c,f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HofmModel {
    n_features: usize,
    k: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
}

impl HofmModel {
    pub const ORDER: usize = 3;

    pub fn zeros(n_features: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("latent dimension k must be at least 1"));
        }
        Ok(HofmModel {
            n_features,
            k,
            w0: 0.0,
            w: vec![0.0; n_features],
            v2: vec![0.0; n_features * k],
            v3: vec![0.0; n_features * k],
        })
    }

    pub fn random<R: Rng>(n_features: usize, k: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let mut m = HofmModel::zeros(n_features, k)?;
        m.v2 = normal_matrix(n_features, k, scale, rng)?;
        m.v3 = normal_matrix(n_features, k, scale, rng)?;
        Ok(m)
    }

    /// Extends a second-order model with a zero cubic block.
    pub fn from_fm(fm: &FmModel) -> Self {
        HofmModel {
            n_features: fm.n_features(),
            k: fm.k(),
            w0: fm.w0,
            w: fm.w.clone(),
            v2: fm.v.clone(),
            v3: vec![0.0; fm.v.len()],
        }
    }

    /// Drops the cubic block.
    pub fn to_fm(&self) -> FmModel {
        let mut fm = FmModel::zeros(self.n_features, self.k).expect("k >= 1");
        fm.w0 = self.w0;
        fm.w = self.w.clone();
        fm.v = self.v2.clone();
        fm
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v2_row(&self, i: usize) -> &[f64] {
        &self.v2[i * self.k..(i + 1) * self.k]
    }

    pub fn v3_row(&self, i: usize) -> &[f64] {
        &self.v3[i * self.k..(i + 1) * self.k]
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w.iter().chain(&self.v2).chain(&self.v3).all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        check_len(self.n_features, self.w.len())?;
        check_len(self.n_features * self.k, self.v2.len())?;
        check_len(self.n_features * self.k, self.v3.len())?;
        if !self.is_finite() {
            return Err(Error::validation("model has non-finite parameters"));
        }
        Ok(())
    }

    fn pair(&self, a: usize, b: usize) -> f64 {
        self.v2_row(a).iter().zip(self.v2_row(b)).map(|(x, y)| x * y).sum()
    }

    fn triple(&self, a: usize, b: usize, c: usize) -> f64 {
        let (ra, rb, rc) = (self.v3_row(a), self.v3_row(b), self.v3_row(c));
        (0..self.k).map(|f| ra[f] * rb[f] * rc[f]).sum()
    }

    /// Direct evaluation with explicit loops over active pairs and triples.
    pub fn predict(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_features, x.len())?;
        let act = active_indices(x);
        let mut y = self.w0;
        for (p, &a) in act.iter().enumerate() {
            y += self.w[a];
            for (q, &b) in act.iter().enumerate().skip(p + 1) {
                y += self.pair(a, b);
                for &c in &act[q + 1..] {
                    y += self.triple(a, b, c);
                }
            }
        }
        Ok(y)
    }

    /// Evaluation through power sums: per latent column, the pairwise block
    /// is `e2 = (p1^2 - p2) / 2` and the cubic block is
    /// `e3 = (p1^3 - 3 p1 p2 + 2 p3) / 6`.
    pub(crate) fn predict_active(&self, active: &[usize]) -> f64 {
        let k = self.k;
        let mut y = self.w0;
        for &i in active {
            y += self.w[i];
        }
        for f in 0..k {
            let (mut s1, mut s2) = (0.0, 0.0);
            let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
            for &i in active {
                let a = self.v2[i * k + f];
                s1 += a;
                s2 += a * a;
                let b = self.v3[i * k + f];
                t1 += b;
                t2 += b * b;
                t3 += b * b * b;
            }
            y += 0.5 * (s1 * s1 - s2);
            y += (t1 * t1 * t1 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0;
        }
        y
    }

    pub fn to_hubo(&self) -> HuboModel {
        let n = self.n_features;
        let mut h = HuboModel::new(n);
        h.add_constant(self.w0);
        for a in 0..n {
            h.add_term(&[a], self.w[a]).expect("index in range");
            for b in a + 1..n {
                h.add_term(&[a, b], self.pair(a, b)).expect("index in range");
                for c in b + 1..n {
                    h.add_term(&[a, b, c], self.triple(a, b, c)).expect("index in range");
                }
            }
        }
        h
    }

    pub fn to_json(&self) -> String {
        let rows = |m: &[f64]| m.chunks(self.k).map(<[f64]>::to_vec).collect();
        let rec = HofmRecord {
            format: HOFM_FORMAT.to_string(),
            n: self.n_features,
            k: self.k,
            order: Self::ORDER,
            w0: self.w0,
            w: self.w.clone(),
            v: rows(&self.v2),
            v3: rows(&self.v3),
        };
        serde_json::to_string_pretty(&rec).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: HofmRecord = serde_json::from_str(s)?;
        if rec.format != HOFM_FORMAT || rec.order != Self::ORDER {
            return Err(Error::validation(format!("unsupported model format `{}`", rec.format)));
        }
        let mut m = HofmModel::zeros(rec.n, rec.k)?;
        m.w0 = rec.w0;
        m.w = rec.w;
        check_len(rec.n, rec.v.len())?;
        check_len(rec.n, rec.v3.len())?;
        for (i, (r2, r3)) in rec.v.iter().zip(&rec.v3).enumerate() {
            check_len(rec.k, r2.len())?;
            check_len(rec.k, r3.len())?;
            m.v2[i * rec.k..(i + 1) * rec.k].copy_from_slice(r2);
            m.v3[i * rec.k..(i + 1) * rec.k].copy_from_slice(r3);
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct HofmRecord {
    format: String,
    n: usize,
    k: usize,
    order: usize,
    w0: f64,
    w: Vec<f64>,
    v: Vec<Vec<f64>>,
    v3: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_only() -> HofmModel {
        let mut m = HofmModel::zeros(3, 1).unwrap();
        m.v3 = vec![1.0, 2.0, 3.0];
        m
    }

    #[test]
    fn zero_input_returns_bias() {
        let mut m = cubic_only();
        m.w0 = 2.5;
        assert_eq!(m.predict(&[0, 0, 0]).unwrap(), 2.5);
    }

    #[test]
    fn single_triple_product() {
        let m = cubic_only();
        assert_eq!(m.predict(&[1, 1, 1]).unwrap(), 6.0);
        assert_eq!(m.predict(&[1, 1, 0]).unwrap(), 0.0);
        assert_eq!(m.to_hubo().coeff(&[0, 1, 2]), 6.0);
        assert!((m.predict_active(&[0, 1, 2]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cubic_block_matches_fm() {
        let fm = FmModel::from_parts(
            0.5,
            vec![1.0, -1.0, 0.25],
            vec![vec![1.0, 0.5], vec![-0.5, 2.0], vec![0.3, 0.1]],
        )
        .unwrap();
        let h = HofmModel::from_fm(&fm);
        for idx in 0..8u64 {
            let x = crate::BinaryVector::from_index(idx, 3);
            assert!((h.predict(&x).unwrap() - fm.predict(&x).unwrap()).abs() < 1e-12);
        }
        assert_eq!(h.to_hubo(), fm.to_hubo());
    }

    #[test]
    fn json_roundtrip() {
        let m = cubic_only();
        assert_eq!(HofmModel::from_json(&m.to_json()).unwrap(), m);
    }
}
