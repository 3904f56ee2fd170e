use super::BinaryVector;
use crate::error::{Error, Result};

/// Encodes a non-negative integer as `sum_{i=-p}^{q} x_i 2^i`. The returned
/// bits are ordered from `x_{-p}` to `x_q`; fractional bits of an integer are
/// always zero.
pub fn encode_integer(value: i64, p: u32, q: u32) -> Result<BinaryVector> {
    if q >= 62 {
        return Err(Error::Range(format!("exponent bound q={q} too large")));
    }
    let max = (1i64 << (q + 1)) - 1;
    if value < 0 || value > max {
        return Err(Error::Range(format!(
            "{value} not representable with bits 2^0..2^{q} (max {max})"
        )));
    }
    let mut bits = vec![0u8; p as usize];
    bits.extend((0..=q).map(|i| ((value >> i) & 1) as u8));
    BinaryVector::new(bits)
}

/// Inverse of [`encode_integer`]: `sum_k bits[k] * 2^(k - p)`.
pub fn decode_binary(bits: &[u8], p: u32) -> f64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(k, _)| 2f64.powi(k as i32 - p as i32))
        .sum()
}
