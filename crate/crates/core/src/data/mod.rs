//! Drug-combination response tables.
//!
//! Records are read from a canonical CSV with the header
//! `drug_a,drug_b,cell_line,conc_a_level,conc_b_level,response`, level
//! indices 0-based. Two experiment layouts are supported: full dose-response
//! matrices ([`Scenario::DoseMatrix`], 8 levels per drug) and unseen drug
//! combinations on a coarser dose grid ([`Scenario::UnseenCombination`], 4
//! levels per drug, responses are percentage growth and exceed -100).

mod blackbox;
mod encoding;
mod split;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use blackbox::{make_synthetic_blackbox, make_table_blackbox, SyntheticBlackBox, SyntheticSpec, TableBlackBox};
pub use encoding::{EncodedFields, EncodingSpec};
pub use split::{scenario2_datasets, split_scenario1, split_scenario2, Cell, DoseMatrix, Scenario1Split, MATRIX_SIZE};

pub const RECORD_HEADER: [&str; 6] = [
    "drug_a",
    "drug_b",
    "cell_line",
    "conc_a_level",
    "conc_b_level",
    "response",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Predict the rest of an 8x8 dose-response matrix from a few cells.
    DoseMatrix,
    /// Predict drug pairs never seen in training.
    UnseenCombination,
}

impl Scenario {
    /// Number of concentration levels per drug.
    pub fn levels(self) -> usize {
        match self {
            Scenario::DoseMatrix => 8,
            Scenario::UnseenCombination => 4,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::DoseMatrix => 1,
            Scenario::UnseenCombination => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scenario::DoseMatrix),
            2 => Ok(Scenario::UnseenCombination),
            _ => Err(Error::validation(format!("unknown scenario {n}, expected 1 or 2"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub drug_a: String,
    pub drug_b: String,
    pub cell_line: String,
    pub conc_a_level: usize,
    pub conc_b_level: usize,
    pub response: f64,
}

impl ResponseRecord {
    pub fn validate(&self, scenario: Scenario) -> Result<()> {
        let levels = scenario.levels();
        for (name, level) in [("conc_a_level", self.conc_a_level), ("conc_b_level", self.conc_b_level)] {
            if level >= levels {
                return Err(Error::validation(format!("{name} {level} outside 0..{levels}")));
            }
        }
        if !self.response.is_finite() {
            return Err(Error::validation("response must be finite"));
        }
        if scenario == Scenario::UnseenCombination && self.response <= -100.0 {
            return Err(Error::validation(format!(
                "percentage growth {} must exceed -100",
                self.response
            )));
        }
        Ok(())
    }

    /// The same measurement with the two drugs listed in the other order.
    pub fn swapped(&self) -> Self {
        ResponseRecord {
            drug_a: self.drug_b.clone(),
            drug_b: self.drug_a.clone(),
            cell_line: self.cell_line.clone(),
            conc_a_level: self.conc_b_level,
            conc_b_level: self.conc_a_level,
            response: self.response,
        }
    }
}

pub fn load_records(path: impl AsRef<Path>, scenario: Scenario) -> Result<Vec<ResponseRecord>> {
    read_records(File::open(path)?, scenario)
}

/// Parses and validates records from CSV text. Errors carry the 1-based line
/// number of the offending row.
pub fn read_records<R: Read>(reader: R, scenario: Scenario) -> Result<Vec<ResponseRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != RECORD_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {}, found {}",
                RECORD_HEADER.join(","),
                header.join(",")
            ),
        });
    }
    let mut out = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        let line = rdr.position().line() as usize;
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line() as usize);
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = row.position().map_or(line, |p| p.line() as usize);
        let rec: ResponseRecord = row
            .deserialize(Some(&rdr.headers()?.clone()))
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        rec.validate(scenario)
            .map_err(|e| Error::validation(format!("line {line}: {e}")))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records<W: Write>(writer: W, records: &[ResponseRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends the drug-swapped twin of every record; output is the input
/// followed by the twins, in input order.
pub fn symmetrize(records: &[ResponseRecord]) -> Vec<ResponseRecord> {
    records
        .iter()
        .cloned()
        .chain(records.iter().map(ResponseRecord::swapped))
        .collect()
}
