use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EncodingSpec, ResponseRecord};
use crate::anneal::groups_satisfied;
use crate::binopt::{BinaryVector, HuboModel};
use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::seed::{child_rng, derive_seed, rng_from};
use crate::surrogate::BlackBox;

/// Exact lookup over measured records.
#[derive(Debug, Clone)]
pub struct TableBlackBox {
    spec: EncodingSpec,
    table: BTreeMap<Vec<u8>, f64>,
}

/// Encodes every record; replicate measurements of the same input are
/// averaged.
pub fn make_table_blackbox(records: &[ResponseRecord], spec: &EncodingSpec) -> Result<TableBlackBox> {
    if records.is_empty() {
        return Err(Error::validation("table black box needs at least one record"));
    }
    let mut acc: BTreeMap<Vec<u8>, (f64, usize)> = BTreeMap::new();
    for r in records {
        let slot = acc.entry(spec.encode(r)?.into_inner()).or_default();
        slot.0 += r.response;
        slot.1 += 1;
    }
    Ok(TableBlackBox {
        spec: spec.clone(),
        table: acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect(),
    })
}

impl TableBlackBox {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn spec(&self) -> &EncodingSpec {
        &self.spec
    }
}

impl BlackBox for TableBlackBox {
    fn n_inputs(&self) -> usize {
        self.spec.total_bits()
    }

    fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        self.spec.one_hot_groups()
    }

    fn query(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_inputs(), x.len())?;
        self.table.get(x).copied().ok_or_else(|| {
            Error::Domain(BinaryVector::new(x.to_vec()).map_or_else(|e| e.to_string(), |b| b.to_string()))
        })
    }

    /// `n` distinct stored inputs, chosen uniformly.
    fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n > self.table.len() {
            return Err(Error::validation(format!(
                "cannot draw {n} distinct samples from {} stored inputs",
                self.table.len()
            )));
        }
        let entries: Vec<(&Vec<u8>, &f64)> = self.table.iter().collect();
        Dataset::from_pairs(sample(&mut rng_from(seed), entries.len(), n).into_iter().map(|k| {
            (
                BinaryVector::new(entries[k].0.clone()).expect("stored inputs are binary"),
                *entries[k].1,
            )
        }))
    }
}

/// Parameters of a synthetic black box; enough to rebuild it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_groups: usize,
    pub group_size: usize,
    /// Interaction orders present in the hidden polynomial, each in 1..=3.
    pub orders: Vec<usize>,
    pub noise_sd: f64,
    pub seed: u64,
}

/// A hidden polynomial over `n_groups` one-hot blocks. For every requested
/// order `d`, each choice of `d` distinct blocks and one bit per block gets a
/// standard-normal coefficient. Observation noise is a pure function of the
/// seed and the input, so repeated queries agree.
#[derive(Debug, Clone)]
pub struct SyntheticBlackBox {
    spec: SyntheticSpec,
    hidden: HuboModel,
}

pub fn make_synthetic_blackbox(
    n_groups: usize,
    group_size: usize,
    orders: &[usize],
    noise_sd: f64,
    seed: u64,
) -> Result<SyntheticBlackBox> {
    SyntheticBlackBox::from_spec(SyntheticSpec {
        n_groups,
        group_size,
        orders: orders.to_vec(),
        noise_sd,
        seed,
    })
}

/// All increasing `d`-subsets of `0..n`, lexicographic.
fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::new(), &mut out);
    out
}

impl SyntheticBlackBox {
    pub fn from_spec(spec: SyntheticSpec) -> Result<Self> {
        if spec.n_groups == 0 || spec.group_size == 0 {
            return Err(Error::validation("need at least one group of at least one bit"));
        }
        if spec.orders.is_empty() || spec.orders.iter().any(|&d| !(1..=3).contains(&d)) {
            return Err(Error::validation("orders must be a nonempty subset of {1, 2, 3}"));
        }
        if let Some(&d) = spec.orders.iter().find(|&&d| d > spec.n_groups) {
            return Err(Error::validation(format!("order {d} needs at least {d} groups")));
        }
        if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
            return Err(Error::validation("noise_sd must be finite and non-negative"));
        }
        let mut orders = spec.orders.clone();
        orders.sort_unstable();
        orders.dedup();

        let gs = spec.group_size;
        let mut hidden = HuboModel::new(spec.n_groups * gs);
        let mut rng = child_rng(spec.seed, "synthetic-coeff", &[]);
        for &d in &orders {
            for blocks in subsets(spec.n_groups, d) {
                for combo in 0..gs.pow(d as u32) {
                    let mut rest = combo;
                    let mut idx = Vec::with_capacity(d);
                    for &b in blocks.iter().rev() {
                        idx.push(b * gs + rest % gs);
                        rest /= gs;
                    }
                    let c: f64 = StandardNormal.sample(&mut rng);
                    hidden.add_term(&idx, c)?;
                }
            }
        }
        Ok(SyntheticBlackBox { spec, hidden })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    /// The noise-free response function.
    pub fn hidden(&self) -> &HuboModel {
        &self.hidden
    }

    fn noise(&self, x: &[u8]) -> f64 {
        if self.spec.noise_sd == 0.0 {
            return 0.0;
        }
        let words: Vec<u64> = x
            .chunks(64)
            .map(|c| c.iter().enumerate().fold(0u64, |w, (i, &b)| w | (u64::from(b) << i)))
            .collect();
        let mut rng = rng_from(derive_seed(self.spec.seed, "synthetic-noise", &words));
        let z: f64 = StandardNormal.sample(&mut rng);
        self.spec.noise_sd * z
    }
}

impl BlackBox for SyntheticBlackBox {
    fn n_inputs(&self) -> usize {
        self.spec.n_groups * self.spec.group_size
    }

    fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        let gs = self.spec.group_size;
        (0..self.spec.n_groups)
            .map(|g| (g * gs..(g + 1) * gs).collect())
            .collect()
    }

    fn query(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_inputs(), x.len())?;
        if !groups_satisfied(x, &self.one_hot_groups()) {
            return Err(Error::Domain("input violates the one-hot blocks".into()));
        }
        Ok(self.hidden.energy(x)? + self.noise(x))
    }

    /// `n` uniform feasible inputs, drawn with replacement.
    fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng_from(seed);
        let gs = self.spec.group_size;
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let mut bits = vec![0u8; self.n_inputs()];
            for g in 0..self.spec.n_groups {
                bits[g * gs + rng.random_range(0..gs)] = 1;
            }
            let y = self.query(&bits)?;
            pairs.push((BinaryVector::new(bits)?, y));
        }
        Dataset::from_pairs(pairs)
    }
}
