use std::fmt;

use super::SchemeError;

/// Classical outcome `(I, R)` of measuring a token.
///
/// `index` is 1-based in `[1, 2^k]`; `value` is a `k`-bit string. On the wire
/// a report is exactly `2k` bits: `(I − 1)` big-endian in `k` bits followed by `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenReport {
    index: u64,
    value: u64,
}

impl TokenReport {
    pub fn new(index: u64, value: u64) -> Self {
        Self { index, value }
    }

    /// Splits a `2k`-bit measurement outcome into `(I, R)`.
    pub fn from_wire(k: u32, word: u64) -> Self {
        let mask = (1u64 << k) - 1;
        Self {
            index: (word >> k) + 1,
            value: word & mask,
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Checks `I ∈ [1, 2^k]` and `R < 2^k`.
    pub fn validate(&self, k: u32) -> Result<(), SchemeError> {
        let size = 1u64 << k;
        if !(1..=size).contains(&self.index) || self.value >= size {
            return Err(SchemeError::ReportOutOfRange {
                index: self.index,
                value: self.value,
                k,
            });
        }
        Ok(())
    }

    /// The `2k`-bit wire word.
    pub fn to_wire(&self, k: u32) -> Result<u64, SchemeError> {
        self.validate(k)?;
        Ok(((self.index - 1) << k) | self.value)
    }

    /// Lowercase hex of the `2k`-bit wire word (`k/2` digits).
    pub fn to_hex(&self, k: u32) -> Result<String, SchemeError> {
        let word = self.to_wire(k)?;
        Ok(format!("{word:0width$x}", width = (k / 2) as usize))
    }

    pub fn from_hex(k: u32, hex: &str) -> Result<Self, SchemeError> {
        let word = parse_fixed_hex(hex, (k / 2) as usize)?;
        Ok(Self::from_wire(k, word))
    }

    /// Lowercase hex of `R` alone (`k/4` digits), as carried by `VERIFY`.
    pub fn value_hex(&self, k: u32) -> String {
        format_value_hex(self.value, k)
    }
}

impl fmt::Display for TokenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:#x})", self.index, self.value)
    }
}

/// `k`-bit value as `k/4` lowercase hex digits.
pub fn format_value_hex(value: u64, k: u32) -> String {
    format!("{value:0width$x}", width = (k / 4) as usize)
}

/// Parses exactly `digits` lowercase-or-uppercase hex digits.
pub fn parse_fixed_hex(hex: &str, digits: usize) -> Result<u64, SchemeError> {
    if hex.len() != digits || digits == 0 || digits > 16 {
        return Err(SchemeError::Hex(format!(
            "expected {digits} hex digits, got {:?}",
            hex
        )));
    }
    u64::from_str_radix(hex, 16).map_err(|e| SchemeError::Hex(e.to_string()))
}
