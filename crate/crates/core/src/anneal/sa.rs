use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{groups_satisfied, AnnealConfig, AuditReport, SolveResult};
use crate::binopt::{BinaryVector, QuboModel};
use crate::error::Result;
use crate::seed::child_rng;

const TEMPERATURE_SAMPLES: usize = 100;

/// Dense form of the problem with precomputed move structure.
struct Problem<'a> {
    model: &'a QuboModel,
    n: usize,
    coupling: Vec<f64>,
    linear: Vec<f64>,
    free: Vec<usize>,
    groups: &'a [Vec<usize>],
}

struct Chain {
    x: Vec<u8>,
    field: Vec<f64>,
    hot: Vec<usize>,
    energy: f64,
}

impl<'a> Problem<'a> {
    fn new(model: &'a QuboModel, cfg: &'a AnnealConfig) -> Self {
        let (coupling, linear) = model.to_dense();
        Problem {
            model,
            n: model.n_vars(),
            coupling,
            linear,
            free: cfg.free_indices(model.n_vars()),
            groups: &cfg.one_hot_groups,
        }
    }

    fn random_chain(&self, rng: &mut ChaCha8Rng) -> Chain {
        let mut x = vec![0u8; self.n];
        for &i in &self.free {
            x[i] = rng.random_range(0..2);
        }
        let hot: Vec<usize> = self
            .groups
            .iter()
            .map(|g| {
                let h = g[rng.random_range(0..g.len())];
                x[h] = 1;
                h
            })
            .collect();
        let mut field = self.linear.clone();
        for (j, &xj) in x.iter().enumerate() {
            if xj == 1 {
                let row = &self.coupling[j * self.n..(j + 1) * self.n];
                for (f, c) in field.iter_mut().zip(row) {
                    *f += c;
                }
            }
        }
        let energy = self.model.energy_unchecked(&x);
        Chain { x, field, hot, energy }
    }

    fn flip_delta(&self, c: &Chain, i: usize) -> f64 {
        if c.x[i] == 0 {
            c.field[i]
        } else {
            -c.field[i]
        }
    }

    fn apply_flip(&self, c: &mut Chain, i: usize, delta: f64) {
        let sign = if c.x[i] == 0 { 1.0 } else { -1.0 };
        c.x[i] ^= 1;
        let row = &self.coupling[i * self.n..(i + 1) * self.n];
        for (f, q) in c.field.iter_mut().zip(row) {
            *f += sign * q;
        }
        c.energy += delta;
    }

    /// Moving the hot bit of a group from `from` to `to`.
    fn relocate_delta(&self, c: &Chain, from: usize, to: usize) -> f64 {
        c.field[to] - c.field[from] - self.coupling[from * self.n + to]
    }

    fn apply_relocate(&self, c: &mut Chain, group: usize, from: usize, to: usize, delta: f64) {
        c.x[from] = 0;
        c.x[to] = 1;
        c.hot[group] = to;
        let row_from = &self.coupling[from * self.n..(from + 1) * self.n];
        let row_to = &self.coupling[to * self.n..(to + 1) * self.n];
        for ((f, a), b) in c.field.iter_mut().zip(row_from).zip(row_to) {
            *f += b - a;
        }
        c.energy += delta;
    }

    fn has_moves(&self) -> bool {
        !self.free.is_empty() || self.groups.iter().any(|g| g.len() > 1)
    }

    /// Largest `|dE|` over randomly sampled single moves from random states.
    fn estimate_t_initial(&self, seed: u64) -> f64 {
        let mut rng = child_rng(seed, "anneal-temperature", &[]);
        let movable: Vec<usize> = (0..self.groups.len()).filter(|&g| self.groups[g].len() > 1).collect();
        let n_moves = self.free.len() + movable.len();
        let mut largest: f64 = 0.0;
        if n_moves == 0 {
            return 1.0;
        }
        for _ in 0..TEMPERATURE_SAMPLES {
            let c = self.random_chain(&mut rng);
            let pick = rng.random_range(0..n_moves);
            let delta = if pick < self.free.len() {
                self.flip_delta(&c, self.free[pick])
            } else {
                let g = movable[pick - self.free.len()];
                let group = &self.groups[g];
                let from = c.hot[g];
                let mut to = group[rng.random_range(0..group.len())];
                while to == from {
                    to = group[rng.random_range(0..group.len())];
                }
                self.relocate_delta(&c, from, to)
            };
            largest = largest.max(delta.abs());
        }
        if largest > 0.0 && largest.is_finite() {
            largest
        } else {
            1.0
        }
    }

    fn audit(&self, c: &Chain, report: &mut AuditReport) {
        report.moves_checked += 1;
        let exact = self.model.energy_unchecked(&c.x);
        report.max_energy_drift = report.max_energy_drift.max((exact - c.energy).abs());
        if !groups_satisfied(&c.x, self.groups) {
            report.infeasible_states += 1;
        }
    }

    fn run_read(&self, cfg: &AnnealConfig, temps: &[f64], read: usize) -> (f64, Vec<u8>, AuditReport) {
        let mut rng = child_rng(cfg.seed, "anneal-read", &[read as u64]);
        let mut c = self.random_chain(&mut rng);
        let mut report = AuditReport::default();
        if cfg.audit {
            self.audit(&c, &mut report);
        }
        let mut best_energy = c.energy;
        let mut best_x = c.x.clone();

        let accept = |delta: f64, t: f64, rng: &mut ChaCha8Rng| -> bool {
            if delta <= 0.0 {
                return true;
            }
            let z = delta / t;
            z < 50.0 && rng.random::<f64>() < (-z).exp()
        };

        for &t in temps {
            for &i in &self.free {
                let delta = self.flip_delta(&c, i);
                if accept(delta, t, &mut rng) {
                    self.apply_flip(&mut c, i, delta);
                    if cfg.audit {
                        self.audit(&c, &mut report);
                    }
                    if c.energy < best_energy {
                        best_energy = c.energy;
                        best_x.copy_from_slice(&c.x);
                    }
                }
            }
            for (g, group) in self.groups.iter().enumerate() {
                if group.len() < 2 {
                    continue;
                }
                for _ in 0..group.len() - 1 {
                    let from = c.hot[g];
                    // Uniform over the other members of the group.
                    let mut slot = rng.random_range(0..group.len() - 1);
                    if group[slot] == from {
                        slot = group.len() - 1;
                    }
                    let to = group[slot];
                    let delta = self.relocate_delta(&c, from, to);
                    if accept(delta, t, &mut rng) {
                        self.apply_relocate(&mut c, g, from, to, delta);
                        if cfg.audit {
                            self.audit(&c, &mut report);
                        }
                        if c.energy < best_energy {
                            best_energy = c.energy;
                            best_x.copy_from_slice(&c.x);
                        }
                    }
                }
            }
        }
        // Rescore exactly; the running energy carries rounding from updates.
        let exact = self.model.energy_unchecked(&best_x);
        (exact, best_x, report)
    }
}

fn schedule(t_initial: f64, t_final: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![t_final];
    }
    let ratio = (t_final / t_initial).powf(1.0 / (sweeps - 1) as f64);
    (0..sweeps).map(|s| t_initial * ratio.powi(s as i32)).collect()
}

/// Runs `num_reads` independent annealing chains and returns the lowest
/// energy state over all of them; ties go to the lowest read index. Each
/// read's randomness comes from `(seed, read index)`, so the result does not
/// depend on how reads are scheduled across threads.
pub fn solve(model: &QuboModel, cfg: &AnnealConfig) -> Result<SolveResult> {
    let n = model.n_vars();
    cfg.validate(n)?;
    let problem = Problem::new(model, cfg);

    if !problem.has_moves() {
        // Nothing can change: every state is fixed by the groups.
        let mut rng = child_rng(cfg.seed, "anneal-read", &[0]);
        let c = problem.random_chain(&mut rng);
        let mut result = SolveResult::finish(model, BinaryVector::new(c.x)?, &cfg.one_hot_groups);
        if cfg.keep_read_energies {
            result.read_energies = Some(vec![result.best_energy; cfg.num_reads]);
        }
        if cfg.audit {
            result.audit = Some(AuditReport::default());
        }
        return Ok(result);
    }

    let t_initial = cfg.t_initial.unwrap_or_else(|| problem.estimate_t_initial(cfg.seed));
    let t_final = cfg.t_final.unwrap_or(1e-3 * t_initial).min(t_initial);
    let temps = schedule(t_initial, t_final, cfg.sweeps_per_read);

    let reads: Vec<(f64, Vec<u8>, AuditReport)> = (0..cfg.num_reads)
        .into_par_iter()
        .map(|r| problem.run_read(cfg, &temps, r))
        .collect();

    let mut best = 0;
    for (r, read) in reads.iter().enumerate() {
        if read.0 < reads[best].0 {
            best = r;
        }
    }
    let read_energies = cfg.keep_read_energies.then(|| reads.iter().map(|r| r.0).collect());
    let audit = cfg.audit.then(|| {
        let mut total = AuditReport::default();
        for r in &reads {
            total.merge(&r.2);
        }
        total
    });
    let mut reads = reads;
    let best_x = BinaryVector::new(std::mem::take(&mut reads[best].1))?;
    let mut result = SolveResult::finish(model, best_x, &cfg.one_hot_groups);
    result.read_energies = read_energies;
    result.audit = audit;
    Ok(result)
}
