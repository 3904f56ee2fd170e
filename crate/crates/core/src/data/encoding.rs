use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ResponseRecord, Scenario};
use crate::binopt::BinaryVector;
use crate::error::{check_len, Error, Result};

/// One-hot layout of a record. Blocks are laid out in order; slack bits, if
/// any, follow them and are not produced by [`EncodingSpec::encode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    scenario: Scenario,
    groups: Vec<(String, usize)>,
    slack_bits: usize,
    /// Drug vocabulary; empty when drugs are not encoded.
    drugs: Vec<String>,
}

/// Fields recoverable from an encoded vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedFields {
    pub drug_a: Option<String>,
    pub drug_b: Option<String>,
    pub conc_a_level: usize,
    pub conc_b_level: usize,
}

impl EncodingSpec {
    /// Two concentration blocks of 8 bits; the drugs are fixed per matrix.
    pub fn scenario1() -> Self {
        let l = Scenario::DoseMatrix.levels();
        EncodingSpec {
            scenario: Scenario::DoseMatrix,
            groups: vec![("conc_a".into(), l), ("conc_b".into(), l)],
            slack_bits: 0,
            drugs: Vec::new(),
        }
    }

    /// Drug, concentration, drug, concentration. The vocabulary is sorted and
    /// deduplicated.
    pub fn scenario2(drugs: impl IntoIterator<Item = String>) -> Result<Self> {
        let drugs: Vec<String> = drugs.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if drugs.is_empty() {
            return Err(Error::validation("drug vocabulary is empty"));
        }
        let (d, l) = (drugs.len(), Scenario::UnseenCombination.levels());
        Ok(EncodingSpec {
            scenario: Scenario::UnseenCombination,
            groups: vec![
                ("drug_a".into(), d),
                ("conc_a".into(), l),
                ("drug_b".into(), d),
                ("conc_b".into(), l),
            ],
            slack_bits: 0,
            drugs,
        })
    }

    pub fn scenario2_from_records(records: &[ResponseRecord]) -> Result<Self> {
        Self::scenario2(records.iter().flat_map(|r| [r.drug_a.clone(), r.drug_b.clone()]))
    }

    pub fn with_slack(mut self, m: usize) -> Self {
        self.slack_bits = m;
        self
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn groups(&self) -> &[(String, usize)] {
        &self.groups
    }

    pub fn drugs(&self) -> &[String] {
        &self.drugs
    }

    /// Bits produced by [`encode`](Self::encode), slack excluded.
    pub fn total_bits(&self) -> usize {
        self.groups.iter().map(|g| g.1).sum()
    }

    pub fn slack_bits(&self) -> usize {
        self.slack_bits
    }

    /// Bit indices of each block.
    pub fn one_hot_groups(&self) -> Vec<Vec<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|&(_, card)| {
                let g = (start..start + card).collect();
                start += card;
                g
            })
            .collect()
    }

    fn drug_index(&self, drug: &str) -> Result<usize> {
        self.drugs
            .binary_search_by(|d| d.as_str().cmp(drug))
            .map_err(|_| Error::validation(format!("drug {drug:?} not in vocabulary")))
    }

    /// Index chosen in each block, in block order.
    fn choices(&self, r: &ResponseRecord) -> Result<Vec<usize>> {
        r.validate(self.scenario)?;
        Ok(match self.scenario {
            Scenario::DoseMatrix => vec![r.conc_a_level, r.conc_b_level],
            Scenario::UnseenCombination => vec![
                self.drug_index(&r.drug_a)?,
                r.conc_a_level,
                self.drug_index(&r.drug_b)?,
                r.conc_b_level,
            ],
        })
    }

    pub fn encode(&self, record: &ResponseRecord) -> Result<BinaryVector> {
        let mut bits = vec![0u8; self.total_bits()];
        for (g, c) in self.one_hot_groups().iter().zip(self.choices(record)?) {
            bits[g[c]] = 1;
        }
        BinaryVector::new(bits)
    }

    /// Inverse of [`encode`](Self::encode). Accepts the bare encoding or one
    /// followed by the slack block; rejects any block that is not one-hot.
    pub fn decode(&self, x: &[u8]) -> Result<EncodedFields> {
        let n = self.total_bits();
        if x.len() != n && x.len() != n + self.slack_bits {
            check_len(n, x.len())?;
        }
        let mut choice = Vec::with_capacity(self.groups.len());
        for (g, (name, _)) in self.one_hot_groups().iter().zip(&self.groups) {
            let hot: Vec<usize> = (0..g.len()).filter(|&k| x[g[k]] == 1).collect();
            if hot.len() != 1 {
                return Err(Error::validation(format!(
                    "block {name} has {} bits set, expected exactly one",
                    hot.len()
                )));
            }
            choice.push(hot[0]);
        }
        Ok(match self.scenario {
            Scenario::DoseMatrix => EncodedFields {
                drug_a: None,
                drug_b: None,
                conc_a_level: choice[0],
                conc_b_level: choice[1],
            },
            Scenario::UnseenCombination => EncodedFields {
                drug_a: Some(self.drugs[choice[0]].clone()),
                drug_b: Some(self.drugs[choice[2]].clone()),
                conc_a_level: choice[1],
                conc_b_level: choice[3],
            },
        })
    }
}
