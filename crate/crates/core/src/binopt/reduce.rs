//! Order reduction of HUBO models by pairwise substitution.
//!
//! Each substitution replaces a product `x_i x_j` inside terms of order three
//! or more with a fresh variable `z` and adds the penalty
//! `lambda * (x_i x_j - 2 x_i z - 2 x_j z + 3 z)`, which is zero exactly when
//! `z = x_i x_j` and at least `lambda` otherwise.

use std::collections::BTreeMap;

use super::{accumulate, BinaryVector, HuboModel, QuboModel};
use crate::error::{check_len, Error, Result};

/// `slack = parent_i * parent_j` at every penalty-free assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlackBinding {
    pub slack: usize,
    pub parent_i: usize,
    pub parent_j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub qubo: QuboModel,
    pub n_original: usize,
    pub slack_bindings: Vec<SlackBinding>,
    pub penalty_weight: f64,
}

impl ReductionResult {
    pub fn n_slack(&self) -> usize {
        self.slack_bindings.len()
    }

    /// The leading original-variable block of a reduced assignment.
    pub fn project(&self, z: &[u8]) -> Result<BinaryVector> {
        check_len(self.qubo.n_vars(), z.len())?;
        BinaryVector::new(z[..self.n_original].to_vec())
    }

    /// Extends an assignment of the original variables with the slack values
    /// implied by the bindings.
    pub fn extend(&self, x: &[u8]) -> Result<BinaryVector> {
        check_len(self.n_original, x.len())?;
        let mut z = x.to_vec();
        z.resize(self.qubo.n_vars(), 0);
        for b in &self.slack_bindings {
            z[b.slack] = z[b.parent_i] & z[b.parent_j];
        }
        BinaryVector::new(z)
    }

    pub fn bindings_satisfied(&self, z: &[u8]) -> bool {
        z.len() == self.qubo.n_vars()
            && self
                .slack_bindings
                .iter()
                .all(|b| z[b.slack] == z[b.parent_i] & z[b.parent_j])
    }
}

/// The gadget `xy - 2xz - 2yz + 3z`.
pub fn gadget_penalty(x: u8, y: u8, z: u8) -> f64 {
    let (x, y, z) = (f64::from(x), f64::from(y), f64::from(z));
    x * y - 2.0 * x * z - 2.0 * y * z + 3.0 * z
}

/// `1 + sum |c_T|`: any binding violation costs more than the whole
/// objective can swing.
pub fn default_penalty_weight(model: &HuboModel) -> f64 {
    1.0 + model.abs_coeff_sum()
}

fn pair_counts(terms: &BTreeMap<Vec<usize>, f64>) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for set in terms.keys().filter(|s| s.len() > 2) {
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                *counts.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    counts
}

fn substitute(terms: &mut BTreeMap<Vec<usize>, f64>, i: usize, j: usize, slack: usize) {
    let hits: Vec<Vec<usize>> = terms
        .keys()
        .filter(|s| s.len() > 2 && s.binary_search(&i).is_ok() && s.binary_search(&j).is_ok())
        .cloned()
        .collect();
    for set in hits {
        let coeff = terms.remove(&set).expect("key collected above");
        let mut reduced: Vec<usize> = set.into_iter().filter(|&v| v != i && v != j).collect();
        // Slack indices exceed every existing index, so pushing keeps order.
        reduced.push(slack);
        accumulate(terms, reduced, coeff);
    }
}

/// Reduces `model` to a QUBO. Pairs are chosen greedily: the pair shared by
/// the most remaining terms of order three or more, ties going to the
/// lexicographically smallest pair. Slacks are numbered from
/// `model.n_vars()` upward in creation order.
pub fn reduce_hubo_to_qubo(model: &HuboModel, penalty_weight: Option<f64>) -> Result<ReductionResult> {
    model.validate()?;
    let lambda = penalty_weight.unwrap_or_else(|| default_penalty_weight(model));
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::validation(format!(
            "penalty weight must be positive, got {lambda}"
        )));
    }

    let n_original = model.n_vars();
    let mut terms = model.terms().clone();
    let mut bindings: Vec<SlackBinding> = Vec::new();

    loop {
        // Reuse a binding whose pair still occurs in a high-order term.
        let reusable = bindings.iter().copied().find(|b| {
            terms
                .keys()
                .any(|s| s.len() > 2 && s.binary_search(&b.parent_i).is_ok() && s.binary_search(&b.parent_j).is_ok())
        });
        if let Some(b) = reusable {
            substitute(&mut terms, b.parent_i, b.parent_j, b.slack);
            continue;
        }

        let counts = pair_counts(&terms);
        let Some((&(i, j), _)) = counts
            .iter()
            .fold(None, |best: Option<(&(usize, usize), &usize)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
        else {
            break;
        };
        let slack = n_original + bindings.len();
        bindings.push(SlackBinding {
            slack,
            parent_i: i,
            parent_j: j,
        });
        substitute(&mut terms, i, j, slack);
    }

    let n_total = n_original + bindings.len();
    let mut qubo = QuboModel::new(n_total);
    qubo.add_constant(model.constant());
    for (set, &c) in &terms {
        match set.as_slice() {
            [i] => qubo.add_linear(*i, c)?,
            [i, j] => qubo.add_quadratic(*i, *j, c)?,
            _ => unreachable!("all terms reduced to order two or less"),
        }
    }
    for b in &bindings {
        qubo.add_quadratic(b.parent_i, b.parent_j, lambda)?;
        qubo.add_quadratic(b.parent_i, b.slack, -2.0 * lambda)?;
        qubo.add_quadratic(b.parent_j, b.slack, -2.0 * lambda)?;
        qubo.add_linear(b.slack, 3.0 * lambda)?;
    }

    Ok(ReductionResult {
        qubo,
        n_original,
        slack_bindings: bindings,
        penalty_weight: lambda,
    })
}
