use std::fs;

use slackfm_core::binopt::text::parse_qubo;
use slackfm_core::{brute_force, solve, AnnealConfig};

use crate::args::SolveArgs;
use crate::config::{resolve, ANNEAL_KEYS};
use crate::error::{CliError, CliResult};

/// Parses `a-b` (inclusive) or a comma list of indices.
pub fn parse_group(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("invalid one-hot group {spec:?}; use a-b or i,j,k"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = spec.split_once('-') {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

pub fn run(args: &SolveArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.model.display())))?;
    let model = parse_qubo(&text).map_err(|e| CliError::Data(format!("{}: {e}", args.model.display())))?;
    let groups = args
        .one_hot
        .iter()
        .map(|g| parse_group(g))
        .collect::<CliResult<Vec<_>>>()?;

    let result = if args.brute_force {
        brute_force(&model, &groups)?
    } else {
        let overrides = args.anneal.to_table();
        debug_assert!(overrides.keys().all(|k| ANNEAL_KEYS.contains(&k.as_str())));
        let cfg = AnnealConfig {
            seed: args.seed,
            one_hot_groups: groups,
            ..resolve(&AnnealConfig::default(), &[&overrides], "anneal")?
        };
        solve(&model, &cfg)?
    };
    println!("energy: {}", result.best_energy);
    println!("assignment: {}", result.best_x);
    println!("feasible: {}", result.feasible);
    Ok(())
}
