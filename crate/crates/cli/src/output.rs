use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical JSON form of a resolved configuration.
pub fn config_hash<T: Serialize>(config: &T) -> CliResult<String> {
    let json = serde_json::to_vec(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(sha256_hex(&json))
}

/// Writes `# config-hash: <hash>`, a header row and the rows.
pub fn write_csv(path: &Path, hash: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut buf = format!("# config-hash: {hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, buf).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
