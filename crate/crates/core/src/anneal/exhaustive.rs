use super::{validate_groups, SolveResult};
use crate::binopt::{BinaryVector, QuboModel};
use crate::error::{Error, Result};

/// Enumeration refuses problems with more feasible states than `2^25`.
pub const BRUTE_FORCE_MAX_LOG2_STATES: f64 = 25.0;

/// Exact minimum by enumerating every feasible state. Within each choice of
/// hot bits the free variables are walked in Gray-code order with O(n)
/// energy updates. Equal energies resolve to the lexicographically smallest
/// bit string.
pub fn brute_force(model: &QuboModel, one_hot_groups: &[Vec<usize>]) -> Result<SolveResult> {
    let n = model.n_vars();
    validate_groups(one_hot_groups, n)?;
    let mut grouped = vec![false; n];
    for g in one_hot_groups {
        for &i in g {
            grouped[i] = true;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !grouped[i]).collect();
    let log2_states = free.len() as f64 + one_hot_groups.iter().map(|g| (g.len() as f64).log2()).sum::<f64>();
    if log2_states > BRUTE_FORCE_MAX_LOG2_STATES {
        return Err(Error::Capacity(format!(
            "2^{log2_states:.1} states exceed the enumeration limit of 2^{BRUTE_FORCE_MAX_LOG2_STATES}"
        )));
    }

    let (coupling, linear) = model.to_dense();
    let tol = 1e-12
        * (1.0
            + model
                .linear()
                .values()
                .chain(model.quadratic().values())
                .map(|c| c.abs())
                .sum::<f64>());
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut consider = |energy: f64, x: &[u8]| match &mut best {
        None => best = Some((energy, x.to_vec())),
        Some((e, bx)) => {
            if energy < *e - tol || (energy <= *e + tol && x < bx.as_slice()) {
                *e = energy.min(*e);
                bx.copy_from_slice(x);
            }
        }
    };

    let mut choice = vec![0usize; one_hot_groups.len()];
    loop {
        let mut x = vec![0u8; n];
        for (g, &c) in choice.iter().enumerate() {
            x[one_hot_groups[g][c]] = 1;
        }
        let mut energy = model.energy_unchecked(&x);
        let mut field = linear.clone();
        for j in (0..n).filter(|&j| x[j] == 1) {
            for (f, c) in field.iter_mut().zip(&coupling[j * n..(j + 1) * n]) {
                *f += c;
            }
        }
        consider(energy, &x);
        for step in 1u64..(1u64 << free.len()) {
            let i = free[step.trailing_zeros() as usize];
            let sign = if x[i] == 0 { 1.0 } else { -1.0 };
            energy += sign * field[i];
            x[i] ^= 1;
            for (f, c) in field.iter_mut().zip(&coupling[i * n..(i + 1) * n]) {
                *f += sign * c;
            }
            consider(energy, &x);
        }

        // Advance the mixed-radix counter over group choices.
        let mut g = 0;
        while g < choice.len() {
            choice[g] += 1;
            if choice[g] < one_hot_groups[g].len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
        if g == choice.len() {
            break;
        }
    }

    let (_, x) = best.expect("at least one state enumerated");
    Ok(SolveResult::finish(model, BinaryVector::new(x)?, one_hot_groups))
}
