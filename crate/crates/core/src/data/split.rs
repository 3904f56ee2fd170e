use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;

use super::{symmetrize, EncodingSpec, ResponseRecord, Scenario};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed::rng_from;

pub const MATRIX_SIZE: usize = 8;

/// `(conc_a_level, conc_b_level)`.
pub type Cell = (usize, usize);

/// Partition of the 8x8 dose grid; both halves are in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario1Split {
    pub train: Vec<Cell>,
    pub test: Vec<Cell>,
}

fn always_train(&(i, j): &Cell) -> bool {
    i == 0 || j == 0 || i == j
}

/// Training cells are the first row and column (single-drug responses), the
/// diagonal, and `n_extra` further cells drawn without replacement; the test
/// set is everything else.
pub fn split_scenario1(n_extra: usize, seed: u64) -> Result<Scenario1Split> {
    let all: Vec<Cell> = (0..MATRIX_SIZE)
        .flat_map(|i| (0..MATRIX_SIZE).map(move |j| (i, j)))
        .collect();
    let rest: Vec<Cell> = all.iter().copied().filter(|c| !always_train(c)).collect();
    if n_extra > rest.len() {
        return Err(Error::validation(format!(
            "n_extra {n_extra} exceeds the {} cells available",
            rest.len()
        )));
    }
    let picked: BTreeSet<Cell> = sample(&mut rng_from(seed), rest.len(), n_extra)
        .into_iter()
        .map(|k| rest[k])
        .collect();
    let (train, test) = all.into_iter().partition(|c| always_train(c) || picked.contains(c));
    Ok(Scenario1Split { train, test })
}

/// One combination's dose-response matrix; unmeasured cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoseMatrix {
    pub drug_a: String,
    pub drug_b: String,
    pub cell_line: String,
    pub responses: [[Option<f64>; MATRIX_SIZE]; MATRIX_SIZE],
}

impl DoseMatrix {
    /// Groups records by (drug_a, drug_b, cell_line), sorted by that key.
    /// Replicate measurements of a cell are averaged.
    pub fn from_records(records: &[ResponseRecord]) -> Result<Vec<DoseMatrix>> {
        type Acc = [[(f64, usize); MATRIX_SIZE]; MATRIX_SIZE];
        let mut by_key: BTreeMap<(&str, &str, &str), Acc> = BTreeMap::new();
        for r in records {
            r.validate(Scenario::DoseMatrix)?;
            let acc = by_key
                .entry((&r.drug_a, &r.drug_b, &r.cell_line))
                .or_insert([[(0.0, 0); MATRIX_SIZE]; MATRIX_SIZE]);
            let slot = &mut acc[r.conc_a_level][r.conc_b_level];
            slot.0 += r.response;
            slot.1 += 1;
        }
        Ok(by_key
            .into_iter()
            .map(|((a, b, c), acc)| DoseMatrix {
                drug_a: a.to_owned(),
                drug_b: b.to_owned(),
                cell_line: c.to_owned(),
                responses: acc.map(|row| row.map(|(s, n)| (n > 0).then(|| s / n as f64))),
            })
            .collect())
    }

    pub fn n_measured(&self) -> usize {
        self.responses.iter().flatten().filter(|v| v.is_some()).count()
    }

    pub fn label(&self) -> String {
        format!("{}+{}@{}", self.drug_a, self.drug_b, self.cell_line)
    }

    fn dataset(&self, cells: &[Cell], spec: &EncodingSpec) -> Result<Dataset> {
        let mut pairs = Vec::with_capacity(cells.len());
        for &(i, j) in cells {
            if let Some(y) = self.responses[i][j] {
                let r = ResponseRecord {
                    drug_a: self.drug_a.clone(),
                    drug_b: self.drug_b.clone(),
                    cell_line: self.cell_line.clone(),
                    conc_a_level: i,
                    conc_b_level: j,
                    response: y,
                };
                pairs.push((spec.encode(&r)?, y));
            }
        }
        Dataset::from_pairs(pairs)
    }

    /// Encoded training and test sets; unmeasured cells are skipped.
    pub fn datasets(&self, split: &Scenario1Split) -> Result<(Dataset, Dataset)> {
        let spec = EncodingSpec::scenario1();
        Ok((self.dataset(&split.train, &spec)?, self.dataset(&split.test, &spec)?))
    }
}

fn unordered(r: &ResponseRecord) -> (&str, &str) {
    if r.drug_a <= r.drug_b {
        (&r.drug_a, &r.drug_b)
    } else {
        (&r.drug_b, &r.drug_a)
    }
}

/// Holds out a seeded fraction of unordered drug pairs, with every dose point
/// of a held-out pair going to test. Single-drug records (`drug_a ==
/// drug_b`) always train. At least one pair is held out and at least one is
/// kept.
pub fn split_scenario2(
    records: &[ResponseRecord],
    missing_ratio: f64,
    seed: u64,
) -> Result<(Vec<ResponseRecord>, Vec<ResponseRecord>)> {
    if !(missing_ratio > 0.0 && missing_ratio < 1.0) {
        return Err(Error::validation(format!(
            "missing_ratio {missing_ratio} outside (0, 1)"
        )));
    }
    let lines: BTreeSet<&str> = records.iter().map(|r| r.cell_line.as_str()).collect();
    if lines.len() > 1 {
        return Err(Error::validation("records span more than one cell line"));
    }
    let pairs: Vec<(&str, &str)> = records
        .iter()
        .filter(|r| r.drug_a != r.drug_b)
        .map(unordered)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pairs.len() < 2 {
        return Err(Error::validation("need at least two drug pairs to split"));
    }
    let n_holdout = ((missing_ratio * pairs.len() as f64).round() as usize).clamp(1, pairs.len() - 1);
    let held: BTreeSet<(&str, &str)> = sample(&mut rng_from(seed), pairs.len(), n_holdout)
        .into_iter()
        .map(|k| pairs[k])
        .collect();
    let (test, train) = records
        .iter()
        .cloned()
        .partition(|r| r.drug_a != r.drug_b && held.contains(&unordered(r)));
    Ok((train, test))
}

/// Symmetrizes both halves of a scenario-2 split and encodes them.
pub fn scenario2_datasets(
    train: &[ResponseRecord],
    test: &[ResponseRecord],
    spec: &EncodingSpec,
) -> Result<(Dataset, Dataset)> {
    let encode = |rs: &[ResponseRecord]| {
        symmetrize(rs)
            .iter()
            .map(|r| Ok((spec.encode(r)?, r.response)))
            .collect::<Result<Vec<_>>>()
            .and_then(Dataset::from_pairs)
    };
    Ok((encode(train)?, encode(test)?))
}
