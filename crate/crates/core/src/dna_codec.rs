//! DNA digital coding: each 2-bit group maps to one of the four bases under a
//! [`CodingPattern`], one of the 4! = 24 bijections.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::radix_codec::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Base {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Base {
    /// Alphabetical order, which is also the symbol order used by the compressor.
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn from_ascii(c: u8) -> Option<Base> {
        match c {
            b'A' | b'a' => Some(Base::A),
            b'C' | b'c' => Some(Base::C),
            b'G' | b'g' => Some(Base::G),
            b'T' | b't' => Some(Base::T),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DnaError {
    #[error("invalid base {0:?}")]
    InvalidBase(char),
    #[error("coding pattern {0:?} is not a permutation of ACGT")]
    NotAPermutation(String),
    #[error("bit string of odd length {0} cannot be DNA-coded")]
    OddBitLength(usize),
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DnaSequence(Vec<Base>);

impl DnaSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    pub fn bases(&self) -> &[Base] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, b: Base) {
        self.0.push(b)
    }

    pub fn extend_from_slice(&mut self, bases: &[Base]) {
        self.0.extend_from_slice(bases)
    }

    pub fn into_vec(self) -> Vec<Base> {
        self.0
    }
}

impl From<Vec<Base>> for DnaSequence {
    fn from(v: Vec<Base>) -> Self {
        Self(v)
    }
}

impl FromStr for DnaSequence {
    type Err = DnaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.bytes()
            .map(|c| Base::from_ascii(c).ok_or(DnaError::InvalidBase(c as char)))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for DnaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|b| b.as_char()).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for DnaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DnaSequence({self})")
    }
}

/// `map[v]` is the base that encodes the 2-bit value `v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodingPattern {
    map: [Base; 4],
    inverse: [u8; 4],
}

impl CodingPattern {
    pub fn new(map: [Base; 4]) -> Result<Self, DnaError> {
        let mut inverse = [u8::MAX; 4];
        for (value, base) in map.iter().enumerate() {
            if inverse[base.index()] != u8::MAX {
                return Err(DnaError::NotAPermutation(map.iter().map(|b| b.as_char()).collect()));
            }
            inverse[base.index()] = value as u8;
        }
        Ok(Self { map, inverse })
    }

    pub fn map(&self) -> [Base; 4] {
        self.map
    }

    pub fn base_for(&self, value: u8) -> Base {
        self.map[value as usize & 3]
    }

    pub fn value_of(&self, base: Base) -> u8 {
        self.inverse[base.index()]
    }

    /// Swaps the bases assigned to two 2-bit values.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut map = self.map;
        map.swap(i, j);
        Self::new(map).expect("swap preserves permutation")
    }
}

impl Default for CodingPattern {
    fn default() -> Self {
        default_pattern()
    }
}

impl fmt::Display for CodingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.map {
            write!(f, "{}", b.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for CodingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CodingPattern({self})")
    }
}

impl FromStr for CodingPattern {
    type Err = DnaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        pattern_from_string(s)
    }
}

/// The coding table 00→A, 01→T, 10→G, 11→C.
pub fn default_pattern() -> CodingPattern {
    CodingPattern::new([Base::A, Base::T, Base::G, Base::C]).expect("ATGC is a permutation")
}

/// Parses a 4-character pattern such as `"CTAG"` (00→C, 01→T, 10→A, 11→G).
pub fn pattern_from_string(s: &str) -> Result<CodingPattern, DnaError> {
    let not_perm = || DnaError::NotAPermutation(s.to_string());
    let bytes = s.as_bytes();
    if bytes.len() != 4 {
        return Err(not_perm());
    }
    let mut map = [Base::A; 4];
    for (slot, &c) in map.iter_mut().zip(bytes) {
        *slot = Base::from_ascii(c).ok_or_else(not_perm)?;
    }
    CodingPattern::new(map).map_err(|_| not_perm())
}

/// All 24 patterns in lexicographic order of their strings.
pub fn enumerate_patterns() -> Vec<CodingPattern> {
    let mut out = Vec::with_capacity(24);
    for a in Base::ALL {
        for b in Base::ALL {
            for c in Base::ALL {
                for d in Base::ALL {
                    if let Ok(p) = CodingPattern::new([a, b, c, d]) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

pub fn encode_bits(bits: &BitString, pattern: &CodingPattern) -> Result<DnaSequence, DnaError> {
    if bits.len() % 2 != 0 {
        return Err(DnaError::OddBitLength(bits.len()));
    }
    let mut out = DnaSequence::with_capacity(bits.len() / 2);
    for i in (0..bits.len()).step_by(2) {
        out.push(pattern.base_for(bits.read_bits(i, 2).expect("in bounds")));
    }
    Ok(out)
}

/// Fast path for whole bytes: four bases per byte, high bits first.
pub fn encode_bytes(bytes: &[u8], pattern: &CodingPattern) -> DnaSequence {
    let mut out = DnaSequence::with_capacity(bytes.len() * 4);
    for &byte in bytes {
        for shift in [6, 4, 2, 0] {
            out.push(pattern.base_for(byte >> shift));
        }
    }
    out
}

pub fn decode_dna(dna: &DnaSequence, pattern: &CodingPattern) -> BitString {
    let mut out = BitString::with_capacity(dna.len() * 2);
    for &b in dna.bases() {
        out.push_bits(pattern.value_of(b), 2);
    }
    out
}

/// Inverse of [`encode_bytes`]. Returns `None` unless the length is a multiple of 4.
pub fn decode_to_bytes(dna: &[Base], pattern: &CodingPattern) -> Option<Vec<u8>> {
    if dna.len() % 4 != 0 {
        return None;
    }
    Some(
        dna.chunks_exact(4)
            .map(|quad| {
                quad.iter()
                    .fold(0u8, |acc, &b| (acc << 2) | pattern.value_of(b))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radix_codec::hex_to_bits;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn default_table() {
        let p = default_pattern();
        assert_eq!(p.base_for(0b00), Base::A);
        assert_eq!(p.base_for(0b01), Base::T);
        assert_eq!(p.base_for(0b10), Base::G);
        assert_eq!(p.base_for(0b11), Base::C);
        let bits = BitString::from_bit_str("00011011").unwrap();
        assert_eq!(encode_bits(&bits, &p).unwrap().to_string(), "ATGC");
    }

    #[test]
    fn pattern_parsing() {
        let p = pattern_from_string("CTAG").unwrap();
        assert_eq!(p.map(), [Base::C, Base::T, Base::A, Base::G]);
        assert_eq!(pattern_from_string("ATGC").unwrap(), default_pattern());
        assert_eq!(pattern_from_string("atgc").unwrap(), default_pattern());
        assert!(matches!(pattern_from_string("AATC"), Err(DnaError::NotAPermutation(_))));
        assert!(pattern_from_string("ATG").is_err());
        assert!(pattern_from_string("ATGX").is_err());
        assert!(pattern_from_string("ATGCA").is_err());
    }

    #[test]
    fn twenty_four_patterns() {
        let all = enumerate_patterns();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0].to_string(), "ACGT");
        assert_eq!(all[23].to_string(), "TGCA");
        let strings: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
        assert_eq!(strings.iter().collect::<HashSet<_>>().len(), 24);
    }

    #[test]
    fn worked_example_encoding() {
        let bits = hex_to_bits("63727970746F").unwrap();
        let dna = encode_bits(&bits, &default_pattern()).unwrap();
        assert_eq!(dna.to_string(), "TGACTCAGTCGTTCAATCTATGCC");
        assert_eq!(encode_bytes(b"crypto", &default_pattern()), dna);
        assert_eq!(decode_dna(&dna, &default_pattern()), bits);
        assert_eq!(
            decode_to_bytes(dna.bases(), &default_pattern()).unwrap(),
            b"crypto"
        );
    }

    #[test]
    fn small_cases() {
        let p = default_pattern();
        let a: DnaSequence = "A".parse().unwrap();
        assert_eq!(decode_dna(&a, &p).to_string(), "00");
        assert_eq!(
            encode_bits(&BitString::from_bit_str("00").unwrap(), &p).unwrap().to_string(),
            "A"
        );
        assert!(encode_bits(&BitString::new(), &p).unwrap().is_empty());
        assert_eq!(
            encode_bits(&BitString::from_bit_str("101").unwrap(), &p),
            Err(DnaError::OddBitLength(3))
        );
        assert!(decode_to_bytes(&[Base::A; 3], &p).is_none());
        assert_eq!("ACGX".parse::<DnaSequence>(), Err(DnaError::InvalidBase('X')));
    }

    #[test]
    fn distinct_patterns_distinct_codes() {
        let bits = BitString::from_bit_str("00011011").unwrap();
        let codes: HashSet<String> = enumerate_patterns()
            .iter()
            .map(|p| encode_bits(&bits, p).unwrap().to_string())
            .collect();
        assert_eq!(codes.len(), 24);
    }

    proptest! {
        #[test]
        fn bijection_under_every_pattern(bytes in proptest::collection::vec(any::<u8>(), 0..64), extra in any::<bool>()) {
            let mut bits = BitString::from_bytes(&bytes);
            if extra {
                bits.push_bits(0b10, 2);
            }
            for p in enumerate_patterns() {
                let dna = encode_bits(&bits, &p).unwrap();
                prop_assert_eq!(dna.len(), bits.len() / 2);
                prop_assert_eq!(&decode_dna(&dna, &p), &bits);
            }
        }
    }
}
