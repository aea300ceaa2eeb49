//! Finite binary words, the index set of cylinders.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite word over `{0,1}`. Bits are stored one per byte, each `0` or `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BinaryWord {
    bits: Vec<u8>,
}

impl BinaryWord {
    /// The empty word ε.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            bits: Vec::with_capacity(n),
        }
    }

    /// Builds a word from bits; any nonzero byte is read as `1`.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Self {
            bits: bits.into_iter().map(|b| u8::from(b != 0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn push(&mut self, bit: u8) {
        self.bits.push(u8::from(bit != 0));
    }

    /// Keeps the first `n` bits.
    pub fn truncate(&mut self, n: usize) {
        self.bits.truncate(n);
    }

    /// `self · bit`
    pub fn extended(&self, bit: u8) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn concat(&self, other: &BinaryWord) -> Self {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    /// The prefix `w↾n`. Panics if `n > len`.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            bits: self.bits[..n].to_vec(),
        }
    }

    /// The window `w_start … w_{end-1}`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            bits: self.bits[start..end].to_vec(),
        }
    }

    /// `T^k w`: the word with its first `k` symbols dropped.
    pub fn shifted(&self, k: usize) -> Self {
        self.slice(k.min(self.len()), self.len())
    }

    pub fn is_prefix_of(&self, other: &BinaryWord) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    pub fn last(&self) -> Option<u8> {
        self.bits.last().copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = u8> + Clone + '_ {
        self.bits.iter().copied()
    }

    /// All `2^n` words of length `n` in lexicographic order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = BinaryWord> {
        assert!(n < usize::BITS as usize, "word length {n} too large to enumerate");
        (0..1usize << n).map(move |code| BinaryWord::from_bits((0..n).rev().map(|i| ((code >> i) & 1) as u8)))
    }

    /// Packs bits MSB-first into bytes; the final byte is zero padded.
    pub fn to_packed(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
            .collect()
    }

    /// Inverse of [`BinaryWord::to_packed`]. Returns `None` if `bytes` is too short.
    pub fn from_packed(bytes: &[u8], len: usize) -> Option<Self> {
        if bytes.len() * 8 < len {
            return None;
        }
        Some(Self {
            bits: (0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect(),
        })
    }
}

impl Index<usize> for BinaryWord {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; `""` and `"ε"` give the empty word.
    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "ε" {
            return Ok(Self::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "invalid character {other:?} in binary word"
                ))),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(|bits| Self { bits })
    }
}

impl From<BinaryWord> for String {
    fn from(w: BinaryWord) -> String {
        w.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }
}

impl TryFrom<String> for BinaryWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl FromIterator<u8> for BinaryWord {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}

/// Shorthand for tests and examples: `word("0110")`. Panics on bad input.
pub fn word(s: &str) -> BinaryWord {
    s.parse().expect("valid binary word literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_word_is_valid() {
        let e = BinaryWord::empty();
        assert_eq!(e.len(), 0);
        assert_eq!(e.to_string(), "ε");
        assert_eq!(word(""), e);
        assert_eq!(word("ε"), e);
    }

    #[test]
    fn prefix_and_shift() {
        let w = word("01101");
        assert_eq!(w.prefix(3), word("011"));
        assert_eq!(w.shifted(2), word("101"));
        assert_eq!(w.shifted(9), BinaryWord::empty());
        assert!(word("01").is_prefix_of(&w));
        assert_eq!(w.count_ones(), 3);
    }

    #[test]
    fn rejects_bad_characters() {
        assert!("012".parse::<BinaryWord>().is_err());
    }

    #[test]
    fn enumerates_lexicographically() {
        let all: Vec<String> = BinaryWord::all_of_length(2).map(String::from).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        assert_eq!(BinaryWord::all_of_length(0).count(), 1);
    }

    fn arb_word(max: usize) -> impl Strategy<Value = BinaryWord> {
        proptest::collection::vec(0u8..2, 0..max).prop_map(BinaryWord::from_bits)
    }

    proptest! {
        #[test]
        fn concat_is_associative(a in arb_word(20), b in arb_word(20), c in arb_word(20)) {
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
            let ab = a.concat(&b);
            prop_assert_eq!(ab.prefix(a.len()), a.clone());
            prop_assert_eq!(ab.len(), a.len() + b.len());
        }

        #[test]
        fn packing_round_trips(w in arb_word(70)) {
            let packed = w.to_packed();
            prop_assert_eq!(packed.len(), w.len().div_ceil(8));
            prop_assert_eq!(BinaryWord::from_packed(&packed, w.len()), Some(w));
        }
    }
}
