//! `gen-synthetic`: materializes a seeded synthetic black box.

use std::fs;
use std::path::Path;

use slackfm_core::binopt::text::write_hubo;
use slackfm_core::data::{SyntheticBlackBox, SyntheticSpec};
use slackfm_core::seed::derive_seed;
use slackfm_core::BlackBox;

use crate::args::SyntheticArgs;
use crate::error::{CliError, CliResult};
use crate::output::{config_hash, write_csv};

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn run(args: &SyntheticArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        n_groups: args.n_groups,
        group_size: args.group_size,
        orders: args.orders.clone(),
        noise_sd: args.noise_sd,
        seed: args.seed,
    };
    let bb = SyntheticBlackBox::from_spec(spec.clone())?;
    let json = serde_json::to_string_pretty(&spec).map_err(|e| CliError::Runtime(e.to_string()))?;
    match &args.spec_out {
        Some(p) => write_text(p, &format!("{json}\n"))?,
        None => println!("{json}"),
    }
    if let Some(p) = &args.hubo_out {
        write_text(p, &write_hubo(bb.hidden()))?;
    }
    if args.samples > 0 {
        let path = args
            .output
            .as_deref()
            .ok_or_else(|| CliError::Usage("--samples needs --output".into()))?;
        let data = bb.sample(args.samples, derive_seed(args.seed, "gen-sample", &[]))?;
        let rows: Vec<Vec<String>> = data.iter().map(|(x, y)| vec![x.to_string(), y.to_string()]).collect();
        let hash = config_hash(&(&spec, args.samples))?;
        write_csv(path, &hash, &["x", "y"], &rows)?;
    }
    Ok(())
}
