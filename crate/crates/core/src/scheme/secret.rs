use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClassicalParams, SchemeError, SchemeParams};

/// Identifier of a minted series. Non-empty, printable ASCII, no whitespace,
/// so it can travel as a single field of the line protocol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesId(String);

impl SeriesId {
    pub fn new(id: impl Into<String>) -> Result<Self, SchemeError> {
        let id = id.into();
        if id.is_empty() || id.len() > 128 || !id.bytes().all(|b| b.is_ascii_graphic()) {
            return Err(SchemeError::InvalidSeriesId(id));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SeriesId {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// The bank's secret bit string, read as consecutive `k`-bit blocks.
///
/// Bit `j` of the string is bit `7 − j mod 8` of byte `j / 8`, so the hex
/// form reads left to right. Block `i` (0-based) is bits `k·i .. k·i + k`,
/// interpreted big-endian; this realizes `F_S(i + 1)`.
///
/// A secret is either stored explicitly or as a ChaCha8 key whose keystream
/// word `i` (truncated to `k` bits) is block `i`. The keyed form lets Monte
/// Carlo trials at large `k` draw a fresh secret without materializing
/// `k·2^k` bits; [`SecretString::materialize`] converts it.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretString {
    k: u32,
    num_blocks: u64,
    store: Store,
    series: SeriesId,
}

#[derive(Clone, PartialEq, Eq)]
enum Store {
    Bytes(Vec<u8>),
    Keyed([u8; 32]),
}

impl fmt::Debug for SecretString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretString")
            .field("k", &self.k)
            .field("num_blocks", &self.num_blocks)
            .field("series", &self.series)
            .finish_non_exhaustive()
    }
}

impl SecretString {
    /// Uniformly random secret for the quantum scheme (`2^k` blocks).
    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, series: SeriesId, rng: &mut R) -> Self {
        Self::random_blocks(params.k, params.num_indices(), series, rng)
    }

    /// Uniformly random secret for the classical scheme (`2^{k/4}` blocks).
    pub fn random_classical<R: Rng + ?Sized>(
        params: &ClassicalParams,
        series: SeriesId,
        rng: &mut R,
    ) -> Self {
        Self::random_blocks(params.k, params.cap_mint, series, rng)
    }

    fn random_blocks<R: Rng + ?Sized>(k: u32, num_blocks: u64, series: SeriesId, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; byte_len(k, num_blocks)];
        rng.fill_bytes(&mut bytes);
        Self {
            k,
            num_blocks,
            store: Store::Bytes(bytes),
            series,
        }
    }

    /// Uniformly random quantum-scheme secret in keyed form.
    pub fn random_keyed<R: Rng + ?Sized>(params: &SchemeParams, series: SeriesId, rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self {
            k: params.k,
            num_blocks: params.num_indices(),
            store: Store::Keyed(key),
            series,
        }
    }

    /// The same secret in explicit byte form.
    pub fn materialize(&self) -> Self {
        match self.store {
            Store::Bytes(_) => self.clone(),
            Store::Keyed(_) => {
                let blocks: Vec<u64> = self.blocks().collect();
                Self::from_blocks(self.k, &blocks, self.series.clone())
                    .expect("k was validated at construction")
            }
        }
    }

    /// Secret whose blocks are exactly `blocks` (each reduced to `k` bits).
    pub fn from_blocks(k: u32, blocks: &[u64], series: SeriesId) -> Result<Self, SchemeError> {
        if k == 0 || !k.is_multiple_of(4) || k > 32 {
            return Err(SchemeError::InvalidK(k));
        }
        let num_blocks = blocks.len() as u64;
        let mut bytes = vec![0u8; byte_len(k, num_blocks)];
        let nibbles = (k / 4) as usize;
        for (i, block) in blocks.iter().enumerate() {
            for j in 0..nibbles {
                let nib = ((block >> (4 * (nibbles - 1 - j))) & 0xf) as u8;
                let pos = i * nibbles + j;
                bytes[pos / 2] |= if pos.is_multiple_of(2) { nib << 4 } else { nib };
            }
        }
        Self::from_bytes(k, num_blocks, bytes, series)
    }

    pub fn from_bytes(
        k: u32,
        num_blocks: u64,
        bytes: Vec<u8>,
        series: SeriesId,
    ) -> Result<Self, SchemeError> {
        if k == 0 || !k.is_multiple_of(4) || k > 32 {
            return Err(SchemeError::InvalidK(k));
        }
        let expected = byte_len(k, num_blocks);
        if bytes.len() != expected || num_blocks == 0 {
            return Err(SchemeError::MalformedSecret {
                expected_bits: expected as u64 * 8,
                actual_bits: bytes.len() as u64 * 8,
            });
        }
        Ok(Self {
            k,
            num_blocks,
            store: Store::Bytes(bytes),
            series,
        })
    }

    /// Parses the hex form produced by [`SecretString::to_hex`].
    pub fn from_hex(k: u32, num_blocks: u64, hex: &str, series: SeriesId) -> Result<Self, SchemeError> {
        let bytes = hex::decode(hex).map_err(|e| SchemeError::Hex(e.to_string()))?;
        Self::from_bytes(k, num_blocks, bytes, series)
    }

    /// Lowercase hex of all `m` bits.
    pub fn to_hex(&self) -> String {
        match &self.store {
            Store::Bytes(bytes) => hex::encode(bytes),
            Store::Keyed(_) => self.materialize().to_hex(),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn num_blocks(&self) -> u64 {
        self.num_blocks
    }

    pub fn bit_len(&self) -> u64 {
        u64::from(self.k) * self.num_blocks
    }

    pub fn series(&self) -> &SeriesId {
        &self.series
    }

    /// True when shaped for the quantum scheme (`2^k` blocks).
    pub fn is_quantum(&self) -> bool {
        self.k <= 32 && self.num_blocks == 1u64 << self.k
    }

    /// Block `i`, 0-based. Panics if `i` is out of range.
    pub fn block(&self, i: u64) -> u64 {
        assert!(i < self.num_blocks, "block {i} out of range");
        match &self.store {
            Store::Bytes(bytes) => {
                let nibbles = u64::from(self.k / 4);
                let start = i * nibbles;
                (start..start + nibbles).fold(0u64, |acc, pos| {
                    let byte = bytes[(pos / 2) as usize];
                    let nib = if pos % 2 == 0 { byte >> 4 } else { byte & 0xf };
                    (acc << 4) | u64::from(nib)
                })
            }
            Store::Keyed(key) => {
                let mut stream = ChaCha8Rng::from_seed(*key);
                stream.set_word_pos(u128::from(i));
                u64::from(stream.next_u32()) & ((1u64 << self.k) - 1)
            }
        }
    }

    /// `F_S(index)` for a 1-based index, or `None` when out of range.
    pub fn value_at(&self, index: u64) -> Option<u64> {
        (1..=self.num_blocks)
            .contains(&index)
            .then(|| self.block(index - 1))
    }

    /// All blocks in order.
    pub fn blocks(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.store {
            Store::Bytes(_) => Box::new((0..self.num_blocks).map(|i| self.block(i))),
            Store::Keyed(key) => {
                let mut stream = ChaCha8Rng::from_seed(*key);
                let mask = (1u64 << self.k) - 1;
                Box::new((0..self.num_blocks).map(move |_| u64::from(stream.next_u32()) & mask))
            }
        }
    }
}

fn byte_len(k: u32, num_blocks: u64) -> usize {
    (u64::from(k) * num_blocks).div_ceil(8) as usize
}
