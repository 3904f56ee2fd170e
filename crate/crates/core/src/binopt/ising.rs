use std::collections::BTreeMap;

use super::{accumulate, check_index, max_abs_diff, QuboModel};
use crate::error::{check_len, Result};

/// `E(s) = offset + sum_{i<j} J_ij s_i s_j + sum_i h_i s_i` over `s` in `{-1,+1}^n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    n_vars: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: BTreeMap<usize, f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(n_vars: usize) -> Self {
        IsingModel {
            n_vars,
            ..Default::default()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &BTreeMap<usize, f64> {
        &self.fields
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields.get(&i).copied().unwrap_or(0.0)
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.couplings.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, coeff: f64) -> Result<()> {
        check_index(i, self.n_vars)?;
        check_index(j, self.n_vars)?;
        if i == j {
            // s_i^2 = 1
            self.offset += coeff;
        } else {
            accumulate(&mut self.couplings, (i.min(j), i.max(j)), coeff);
        }
        Ok(())
    }

    pub fn add_field(&mut self, i: usize, coeff: f64) -> Result<()> {
        check_index(i, self.n_vars)?;
        accumulate(&mut self.fields, i, coeff);
        Ok(())
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    pub fn energy(&self, s: &[i8]) -> Result<f64> {
        check_len(self.n_vars, s.len())?;
        let mut e = self.offset;
        for (&i, &h) in &self.fields {
            e += h * f64::from(s[i]);
        }
        for (&(i, j), &jij) in &self.couplings {
            e += jij * f64::from(s[i] * s[j]);
        }
        Ok(e)
    }

    pub fn max_coeff_diff(&self, other: &IsingModel) -> f64 {
        if self.n_vars != other.n_vars {
            return f64::INFINITY;
        }
        max_abs_diff(&self.fields, &other.fields)
            .max(max_abs_diff(&self.couplings, &other.couplings))
            .max((self.offset - other.offset).abs())
    }

    /// Substitutes `s_i = 1 - 2 x_i`.
    pub fn to_qubo(&self) -> QuboModel {
        let mut q = QuboModel::new(self.n_vars);
        let mut constant = self.offset;
        for (&(i, j), &jij) in &self.couplings {
            // J (1 - 2x_i)(1 - 2x_j) = J - 2J x_i - 2J x_j + 4J x_i x_j
            q.add_quadratic(i, j, 4.0 * jij).expect("canonical indices");
            q.add_linear(i, -2.0 * jij).expect("canonical indices");
            q.add_linear(j, -2.0 * jij).expect("canonical indices");
            constant += jij;
        }
        for (&i, &h) in &self.fields {
            q.add_linear(i, -2.0 * h).expect("canonical indices");
            constant += h;
        }
        q.add_constant(constant);
        q
    }
}

impl QuboModel {
    /// Substitutes `x_i = (1 - s_i) / 2`.
    pub fn to_ising(&self) -> IsingModel {
        let mut ising = IsingModel::new(self.n_vars());
        let mut offset = self.constant();
        for (&(i, j), &q) in self.quadratic() {
            // q (1 - s_i)(1 - s_j) / 4
            let quarter = q / 4.0;
            ising.add_coupling(i, j, quarter).expect("canonical indices");
            ising.add_field(i, -quarter).expect("canonical indices");
            ising.add_field(j, -quarter).expect("canonical indices");
            offset += quarter;
        }
        for (&i, &q) in self.linear() {
            ising.add_field(i, -q / 2.0).expect("canonical indices");
            offset += q / 2.0;
        }
        ising.add_offset(offset);
        ising
    }
}
