use std::collections::BTreeMap;

use super::{accumulate, check_index, QuboModel};
use crate::error::{check_len, Error, Result};

/// A pseudo-Boolean polynomial of arbitrary order:
/// `E(x) = constant + sum_T c_T prod_{i in T} x_i`.
///
/// Term keys are sorted, duplicate-free, non-empty index sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HuboModel {
    n_vars: usize,
    terms: BTreeMap<Vec<usize>, f64>,
    constant: f64,
}

impl HuboModel {
    pub fn new(n_vars: usize) -> Self {
        HuboModel {
            n_vars,
            ..Default::default()
        }
    }

    /// Builds a model from explicit term sets, rejecting any set that is not
    /// already sorted and duplicate-free.
    pub fn from_terms(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, f64)>,
        constant: f64,
    ) -> Result<Self> {
        let mut model = HuboModel::new(n_vars);
        model.constant = constant;
        for (set, coeff) in terms {
            if set.is_empty() {
                return Err(Error::validation("empty index set; use the constant"));
            }
            if !set.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::validation(format!(
                    "index set {set:?} is not sorted and duplicate-free"
                )));
            }
            for &i in &set {
                check_index(i, n_vars)?;
            }
            accumulate(&mut model.terms, set, coeff);
        }
        Ok(model)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.terms
    }

    pub fn coeff(&self, set: &[usize]) -> f64 {
        self.terms.get(set).copied().unwrap_or(0.0)
    }

    /// Accumulates `coeff * prod_{i in indices} x_i`. Indices may arrive in
    /// any order; repeats collapse since `x_i^2 = x_i`. An empty set adds to
    /// the constant.
    pub fn add_term(&mut self, indices: &[usize], coeff: f64) -> Result<()> {
        for &i in indices {
            check_index(i, self.n_vars)?;
        }
        let mut set = indices.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            self.constant += coeff;
        } else {
            accumulate(&mut self.terms, set, coeff);
        }
        Ok(())
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks the canonical-form invariants.
    pub fn validate(&self) -> Result<()> {
        for set in self.terms.keys() {
            if set.is_empty() || !set.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::validation(format!("non-canonical term {set:?}")));
            }
            if let Some(&last) = set.last() {
                check_index(last, self.n_vars)?;
            }
        }
        Ok(())
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_vars, x.len())?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let mut e = self.constant;
        for (set, &c) in &self.terms {
            if set.iter().all(|&i| x[i] == 1) {
                e += c;
            }
        }
        e
    }

    /// Sum of absolute term coefficients (constant excluded).
    pub fn abs_coeff_sum(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Converts a model of order at most two. Returns `None` otherwise.
    pub fn to_qubo(&self) -> Option<QuboModel> {
        if self.max_order() > 2 {
            return None;
        }
        let mut q = QuboModel::new(self.n_vars);
        q.add_constant(self.constant);
        for (set, &c) in &self.terms {
            match set.as_slice() {
                [i] => q.add_linear(*i, c).ok()?,
                [i, j] => q.add_quadratic(*i, *j, c).ok()?,
                _ => unreachable!(),
            }
        }
        Some(q)
    }
}

impl From<&QuboModel> for HuboModel {
    fn from(q: &QuboModel) -> Self {
        let mut h = HuboModel::new(q.n_vars());
        h.constant = q.constant();
        for (&i, &c) in q.linear() {
            h.terms.insert(vec![i], c);
        }
        for (&(i, j), &c) in q.quadratic() {
            h.terms.insert(vec![i, j], c);
        }
        h
    }
}
