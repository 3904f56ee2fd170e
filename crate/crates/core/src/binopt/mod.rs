//! Binary optimization models: QUBO, Ising and higher-order (HUBO) forms.
//!
//! All models store coefficients sparsely under canonical, ascending index
//! keys. Inserting a key twice accumulates, and coefficients that cancel to
//! exactly zero are dropped so that structurally equal models compare equal.

mod encoding;
mod hubo;
mod ising;
mod penalty;
mod qubo;
mod reduce;
pub mod text;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use encoding::{decode_binary, encode_integer};
pub use hubo::HuboModel;
pub use ising::IsingModel;
pub use penalty::add_one_hot_penalty;
pub use qubo::QuboModel;
pub use reduce::{default_penalty_weight, gadget_penalty, reduce_hubo_to_qubo, ReductionResult, SlackBinding};

/// An assignment of 0/1 values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BinaryVector(Vec<u8>);

impl BinaryVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::validation(format!(
                "bit {pos} has value {} (expected 0 or 1)",
                bits[pos]
            )));
        }
        Ok(BinaryVector(bits))
    }

    pub fn zeros(n: usize) -> Self {
        BinaryVector(vec![0; n])
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BinaryVector(bits.iter().map(|&b| u8::from(b)).collect())
    }

    /// Builds a vector from the low `n` bits of `index`, bit 0 of `index`
    /// landing in position 0.
    pub fn from_index(index: u64, n: usize) -> Self {
        BinaryVector((0..n).map(|i| ((index >> i) & 1) as u8).collect())
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Concatenates `self` and `tail`.
    pub fn concat(&self, tail: &[u8]) -> Self {
        let mut bits = Vec::with_capacity(self.0.len() + tail.len());
        bits.extend_from_slice(&self.0);
        bits.extend_from_slice(tail);
        BinaryVector(bits)
    }

    pub fn to_spins(&self) -> SpinVector {
        SpinVector(self.0.iter().map(|&b| 1 - 2 * b as i8).collect())
    }
}

impl Deref for BinaryVector {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl TryFrom<Vec<u8>> for BinaryVector {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        BinaryVector::new(bits)
    }
}

impl From<BinaryVector> for Vec<u8> {
    fn from(v: BinaryVector) -> Vec<u8> {
        v.0
    }
}

impl std::fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// An assignment of -1/+1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::validation(format!(
                "spin {pos} has value {} (expected -1 or +1)",
                spins[pos]
            )));
        }
        Ok(SpinVector(spins))
    }

    /// Maps each spin back through `x = (1 - s) / 2`.
    pub fn to_binary(&self) -> BinaryVector {
        BinaryVector(self.0.iter().map(|&s| ((1 - s) / 2) as u8).collect())
    }
}

impl Deref for SpinVector {
    type Target = [i8];

    fn deref(&self) -> &[i8] {
        &self.0
    }
}

pub(crate) fn check_index(i: usize, n_vars: usize) -> Result<()> {
    if i < n_vars {
        Ok(())
    } else {
        Err(Error::Range(format!("variable index {i} outside [0, {n_vars})")))
    }
}

/// Adds `value` to `map[key]`, dropping the entry if the sum is exactly zero.
pub(crate) fn accumulate<K: Ord>(map: &mut std::collections::BTreeMap<K, f64>, key: K, value: f64) {
    use std::collections::btree_map::Entry;
    if value == 0.0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            let sum = *e.get() + value;
            if sum == 0.0 {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// Largest coefficient-wise difference between two sparse maps, treating
/// missing keys as zero.
pub(crate) fn max_abs_diff<K: Ord>(
    a: &std::collections::BTreeMap<K, f64>,
    b: &std::collections::BTreeMap<K, f64>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, va) in a {
        worst = worst.max((va - b.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, vb) in b {
        if !a.contains_key(k) {
            worst = worst.max(vb.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_vector_rejects_non_bits() {
        assert!(BinaryVector::new(vec![0, 1, 2]).is_err());
        assert!(SpinVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn spin_binary_mapping() {
        let x = BinaryVector::new(vec![0, 1, 1]).unwrap();
        let s = x.to_spins();
        assert_eq!(&*s, &[1, -1, -1]);
        assert_eq!(s.to_binary(), x);
    }

    #[test]
    fn index_layout_is_little_endian() {
        assert_eq!(&*BinaryVector::from_index(0b101, 4), &[1, 0, 1, 0]);
    }
}
