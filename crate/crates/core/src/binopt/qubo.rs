use std::collections::BTreeMap;

use super::{accumulate, check_index, max_abs_diff};
use crate::error::{check_len, Result};

/// `E(x) = c0 + sum_i Q_i x_i + sum_{i<j} Q_ij x_i x_j` over `x` in `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboModel {
    n_vars: usize,
    quadratic: BTreeMap<(usize, usize), f64>,
    linear: BTreeMap<usize, f64>,
    constant: f64,
}

impl QuboModel {
    pub fn new(n_vars: usize) -> Self {
        QuboModel {
            n_vars,
            ..Default::default()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn linear_coeff(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    /// Grows the variable count; existing coefficients are untouched.
    pub fn resize(&mut self, n_vars: usize) {
        assert!(n_vars >= self.n_vars, "QuboModel::resize cannot shrink");
        self.n_vars = n_vars;
    }

    /// Accumulates `coeff * x_i * x_j`. A diagonal pair folds into the
    /// linear term since `x_i^2 = x_i`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) -> Result<()> {
        check_index(i, self.n_vars)?;
        check_index(j, self.n_vars)?;
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => accumulate(&mut self.linear, i, coeff),
            std::cmp::Ordering::Less => accumulate(&mut self.quadratic, (i, j), coeff),
            std::cmp::Ordering::Greater => accumulate(&mut self.quadratic, (j, i), coeff),
        }
        Ok(())
    }

    pub fn add_linear(&mut self, i: usize, coeff: f64) -> Result<()> {
        check_index(i, self.n_vars)?;
        accumulate(&mut self.linear, i, coeff);
        Ok(())
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n_vars, x.len())?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let mut e = self.constant;
        for (&i, &q) in &self.linear {
            if x[i] == 1 {
                e += q;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x[i] == 1 && x[j] == 1 {
                e += q;
            }
        }
        e
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty() && self.constant == 0.0
    }

    /// Largest absolute coefficient difference, missing entries counting as
    /// zero. Returns infinity when the variable counts differ.
    pub fn max_coeff_diff(&self, other: &QuboModel) -> f64 {
        if self.n_vars != other.n_vars {
            return f64::INFINITY;
        }
        max_abs_diff(&self.linear, &other.linear)
            .max(max_abs_diff(&self.quadratic, &other.quadratic))
            .max((self.constant - other.constant).abs())
    }

    /// Dense row-major symmetric coupling matrix (zero diagonal) and linear
    /// vector, for solvers that need O(1) coefficient lookup.
    pub fn to_dense(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_vars;
        let mut couplings = vec![0.0; n * n];
        for (&(i, j), &q) in &self.quadratic {
            couplings[i * n + j] = q;
            couplings[j * n + i] = q;
        }
        let mut linear = vec![0.0; n];
        for (&i, &q) in &self.linear {
            linear[i] = q;
        }
        (couplings, linear)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_energy_is_zero() {
        let q = QuboModel::new(3);
        assert_eq!(q.energy(&[1, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_energies() {
        let mut q = QuboModel::new(2);
        q.add_quadratic(0, 1, 2.0).unwrap();
        q.add_linear(0, 1.0).unwrap();
        assert_eq!(q.energy(&[1, 1]).unwrap(), 3.0);
        assert_eq!(q.energy(&[1, 0]).unwrap(), 1.0);
        assert_eq!(q.energy(&[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_a_dimension_error() {
        let q = QuboModel::new(2);
        assert!(matches!(
            q.energy(&[1]),
            Err(crate::Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn insertions_accumulate_and_cancel() {
        let mut q = QuboModel::new(3);
        q.add_quadratic(2, 0, 1.5).unwrap();
        q.add_quadratic(0, 2, 0.5).unwrap();
        assert_eq!(q.quadratic_coeff(0, 2), 2.0);
        q.add_quadratic(0, 2, -2.0).unwrap();
        assert!(q.quadratic().is_empty());
        q.add_quadratic(1, 1, 4.0).unwrap();
        assert_eq!(q.linear_coeff(1), 4.0);
        assert!(q.add_linear(3, 1.0).is_err());
    }
}
