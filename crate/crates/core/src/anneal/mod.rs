//! QUBO minimization: restart-based simulated annealing and an exhaustive
//! oracle for small problems.
//!
//! One-hot groups are enforced through the move set: a group always holds
//! exactly one set bit, and moves relocate that bit inside the group.
//! Variables outside every group move by single-bit flips.

mod exhaustive;
mod sa;

use serde::{Deserialize, Serialize};

use crate::binopt::{BinaryVector, QuboModel};
use crate::error::{Error, Result};

pub use exhaustive::{brute_force, BRUTE_FORCE_MAX_LOG2_STATES};
pub use sa::solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    /// `None` estimates the starting temperature from sampled move sizes.
    pub t_initial: Option<f64>,
    /// `None` uses `1e-3 * t_initial`.
    pub t_final: Option<f64>,
    pub seed: u64,
    pub one_hot_groups: Vec<Vec<usize>>,
    /// Record every read's best energy in the result.
    pub keep_read_energies: bool,
    /// Recompute the energy and check group feasibility after every accepted
    /// move. Slow; meant for tests.
    pub audit: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            num_reads: 5000,
            sweeps_per_read: 1000,
            t_initial: None,
            t_final: None,
            seed: 0,
            one_hot_groups: Vec::new(),
            keep_read_energies: false,
            audit: false,
        }
    }
}

impl AnnealConfig {
    pub fn with_groups(mut self, groups: Vec<Vec<usize>>) -> Self {
        self.one_hot_groups = groups;
        self
    }

    pub fn validate(&self, n_vars: usize) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::validation("num_reads must be at least 1"));
        }
        if self.sweeps_per_read == 0 {
            return Err(Error::validation("sweeps_per_read must be at least 1"));
        }
        if let Some(t) = self.t_initial {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::validation("t_initial must be positive"));
            }
        }
        if let Some(t) = self.t_final {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::validation("t_final must be positive"));
            }
        }
        if let (Some(ti), Some(tf)) = (self.t_initial, self.t_final) {
            if tf >= ti {
                return Err(Error::validation("t_initial must exceed t_final"));
            }
        }
        validate_groups(&self.one_hot_groups, n_vars)
    }

    /// Indices that belong to no one-hot group.
    pub fn free_indices(&self, n_vars: usize) -> Vec<usize> {
        let mut grouped = vec![false; n_vars];
        for g in &self.one_hot_groups {
            for &i in g {
                if i < n_vars {
                    grouped[i] = true;
                }
            }
        }
        (0..n_vars).filter(|&i| !grouped[i]).collect()
    }
}

pub(crate) fn validate_groups(groups: &[Vec<usize>], n_vars: usize) -> Result<()> {
    let mut owner = vec![None; n_vars];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::validation(format!("one-hot group {g} is empty")));
        }
        for &i in group {
            if i >= n_vars {
                return Err(Error::Range(format!("group {g} index {i} outside [0, {n_vars})")));
            }
            if let Some(other) = owner[i] {
                return Err(Error::validation(format!(
                    "variable {i} appears in one-hot groups {other} and {g}"
                )));
            }
            owner[i] = Some(g);
        }
    }
    Ok(())
}

pub fn groups_satisfied(x: &[u8], groups: &[Vec<usize>]) -> bool {
    groups
        .iter()
        .all(|g| g.iter().filter(|&&i| x.get(i) == Some(&1)).count() == 1)
}

/// Diagnostics collected when [`AnnealConfig::audit`] is set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub moves_checked: u64,
    pub max_energy_drift: f64,
    pub infeasible_states: u64,
}

impl AuditReport {
    fn merge(&mut self, other: &AuditReport) {
        self.moves_checked += other.moves_checked;
        self.max_energy_drift = self.max_energy_drift.max(other.max_energy_drift);
        self.infeasible_states += other.infeasible_states;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_x: BinaryVector,
    pub best_energy: f64,
    pub read_energies: Option<Vec<f64>>,
    /// Every one-hot group holds exactly one set bit.
    pub feasible: bool,
    pub audit: Option<AuditReport>,
}

impl SolveResult {
    fn finish(model: &QuboModel, x: BinaryVector, groups: &[Vec<usize>]) -> Self {
        SolveResult {
            best_energy: model.energy_unchecked(&x),
            feasible: groups_satisfied(&x, groups),
            best_x: x,
            read_energies: None,
            audit: None,
        }
    }
}
