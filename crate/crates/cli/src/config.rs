//! TOML configuration: key checking and layered resolution.
//!
//! Settings resolve in three layers: built-in preset, config file, flags.
//! Every layer is a TOML table so that all three merge the same way and the
//! final values deserialize through the library's own config types.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::Table;

use crate::error::{CliError, CliResult};

pub const TRAIN_KEYS: &[&str] = &[
    "k",
    "learning_rate",
    "beta1",
    "beta2",
    "epochs",
    "batch_size",
    "init_scale",
    "tolerance",
    "patience",
];

pub const ANNEAL_KEYS: &[&str] = &["num_reads", "sweeps_per_read", "t_initial", "t_final"];

/// Allowed top-level keys and `[section]` keys.
pub struct Schema {
    pub top: &'static [&'static str],
    pub sections: &'static [(&'static str, &'static [&'static str])],
}

pub fn read_table(path: Option<&Path>) -> CliResult<Table> {
    let Some(path) = path else {
        return Ok(Table::new());
    };
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    text.parse::<Table>()
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Fails with every unknown key listed, dotted for section keys.
pub fn check_keys(table: &Table, schema: &Schema) -> CliResult<()> {
    let mut unknown = Vec::new();
    for (key, value) in table {
        match schema.sections.iter().find(|(name, _)| name == key) {
            Some((_, allowed)) => match value.as_table() {
                Some(sub) => unknown.extend(
                    sub.keys()
                        .filter(|k| !allowed.contains(&k.as_str()))
                        .map(|k| format!("{key}.{k}")),
                ),
                None => unknown.push(format!("{key} (expected a [{key}] section)")),
            },
            None if !schema.top.contains(&key.as_str()) => unknown.push(key.clone()),
            None => {}
        }
    }
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))))
    }
}

pub fn overlay(base: &mut Table, layer: &Table) {
    for (k, v) in layer {
        base.insert(k.clone(), v.clone());
    }
}

/// Serializes `preset`, overlays the layers in order and deserializes.
pub fn resolve<T: Serialize + DeserializeOwned>(preset: &T, layers: &[&Table], what: &str) -> CliResult<T> {
    let mut base = Table::try_from(preset).map_err(|e| CliError::Runtime(format!("preset for {what}: {e}")))?;
    for layer in layers {
        overlay(&mut base, layer);
    }
    base.try_into()
        .map_err(|e| CliError::Usage(format!("invalid {what} settings: {e}")))
}
