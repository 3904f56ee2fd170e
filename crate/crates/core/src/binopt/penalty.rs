use std::collections::BTreeSet;

use super::{check_index, QuboModel};
use crate::error::{Error, Result};

/// Adds `weight * (sum_{i in g} x_i - 1)^2` for each group `g`, expanded with
/// `x_i^2 = x_i` into `weight * (1 - sum_i x_i + 2 sum_{i<j} x_i x_j)`.
pub fn add_one_hot_penalty(model: &QuboModel, groups: &[Vec<usize>], weight: f64) -> Result<QuboModel> {
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::validation(format!(
            "penalty weight must be positive, got {weight}"
        )));
    }
    let mut out = model.clone();
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::validation(format!("one-hot group {g} is empty")));
        }
        let unique: BTreeSet<usize> = group.iter().copied().collect();
        if unique.len() != group.len() {
            return Err(Error::validation(format!("one-hot group {g} repeats an index")));
        }
        for &i in group {
            check_index(i, model.n_vars())?;
        }
        out.add_constant(weight);
        for (a, &i) in group.iter().enumerate() {
            out.add_linear(i, -weight)?;
            for &j in &group[a + 1..] {
                out.add_quadratic(i, j, 2.0 * weight)?;
            }
        }
    }
    Ok(out)
}
