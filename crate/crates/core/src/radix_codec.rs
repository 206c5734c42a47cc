//! Number conversion stage: plaintext bytes <-> uppercase hex <-> bit strings.
//!
//! Bits are always most-significant-first within each nibble and byte.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RadixError {
    #[error("hex string has odd length {0}")]
    OddLength(usize),
    #[error("invalid hex digit {digit:?} at position {position}")]
    InvalidDigit { digit: char, position: usize },
    #[error("bit length {0} is not a multiple of 4")]
    LengthNotMultipleOf4(usize),
    #[error("bit length {0} is not a multiple of 8")]
    LengthNotMultipleOf8(usize),
}

const HEX_UPPER: &[u8; 16] = b"0123456789ABCDEF";

/// Packed bit string, MSB-first. Bits past `len` in the last byte are zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Every byte contributes 8 bits, high bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self {
            bytes: bytes.to_vec(),
            len: bytes.len() * 8,
        }
    }

    /// Parses a string of `'0'`/`'1'` characters. Returns `None` on any other character.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut out = Self::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `count` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u8, count: u32) {
        for shift in (0..count).rev() {
            self.push((value >> shift) & 1 == 1);
        }
    }

    /// Reads `count` (<= 8) bits starting at `index` as an unsigned value.
    pub fn read_bits(&self, index: usize, count: u32) -> Option<u8> {
        if index + count as usize > self.len {
            return None;
        }
        let mut value = 0u8;
        for offset in 0..count as usize {
            value = (value << 1) | self.get(index + offset)? as u8;
        }
        Some(value)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    /// Packs back into bytes; the length must be a whole number of bytes.
    pub fn to_bytes(&self) -> Result<Vec<u8>, RadixError> {
        if self.len % 8 != 0 {
            return Err(RadixError::LengthNotMultipleOf8(self.len));
        }
        Ok(self.bytes.clone())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, RadixError> {
        if self.len % 8 != 0 {
            return Err(RadixError::LengthNotMultipleOf8(self.len));
        }
        Ok(self.bytes)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

fn nibble_value(c: u8, position: usize) -> Result<u8, RadixError> {
    match c {
        b'0'..=b'9' => Ok(c - b'0'),
        b'a'..=b'f' => Ok(c - b'a' + 10),
        b'A'..=b'F' => Ok(c - b'A' + 10),
        _ => Err(RadixError::InvalidDigit {
            digit: c as char,
            position,
        }),
    }
}

/// Each byte becomes two uppercase hex digits, high nibble first.
pub fn text_to_hex(input: &[u8]) -> String {
    let mut out = String::with_capacity(input.len() * 2);
    for &b in input {
        out.push(HEX_UPPER[(b >> 4) as usize] as char);
        out.push(HEX_UPPER[(b & 0x0F) as usize] as char);
    }
    out
}

/// Inverse of [`text_to_hex`]. Either letter case is accepted.
pub fn hex_to_text(input: &str) -> Result<Vec<u8>, RadixError> {
    let raw = input.as_bytes();
    if raw.len() % 2 != 0 {
        return Err(RadixError::OddLength(raw.len()));
    }
    raw.chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| Ok((nibble_value(pair[0], 2 * i)? << 4) | nibble_value(pair[1], 2 * i + 1)?))
        .collect()
}

/// Four bits per hex digit. Odd digit counts are allowed here.
pub fn hex_to_bits(input: &str) -> Result<BitString, RadixError> {
    let mut out = BitString::with_capacity(input.len() * 4);
    for (position, &c) in input.as_bytes().iter().enumerate() {
        out.push_bits(nibble_value(c, position)?, 4);
    }
    Ok(out)
}

pub fn bits_to_hex(input: &BitString) -> Result<String, RadixError> {
    if input.len() % 4 != 0 {
        return Err(RadixError::LengthNotMultipleOf4(input.len()));
    }
    let mut out = String::with_capacity(input.len() / 4);
    for i in (0..input.len()).step_by(4) {
        let nibble = input.read_bits(i, 4).expect("index within bounds");
        out.push(HEX_UPPER[nibble as usize] as char);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CRYPTO_BITS: &str = "011000110111001001111001011100000111010001101111";

    #[test]
    fn crypto_hex_matches_worked_example() {
        assert_eq!(text_to_hex(b"crypto"), "63727970746F");
        assert_eq!(hex_to_text("63727970746F").unwrap(), b"crypto");
    }

    #[test]
    fn leading_zero_and_empty() {
        assert_eq!(text_to_hex(&[0x0F]), "0F");
        assert_eq!(text_to_hex(&[]), "");
        assert_eq!(hex_to_text("").unwrap(), Vec::<u8>::new());
        assert_eq!(hex_to_text("0f").unwrap(), vec![0x0F]);
    }

    #[test]
    fn hex_parse_errors() {
        assert_eq!(hex_to_text("abc"), Err(RadixError::OddLength(3)));
        assert_eq!(
            hex_to_text("0G"),
            Err(RadixError::InvalidDigit {
                digit: 'G',
                position: 1
            })
        );
        assert!(matches!(hex_to_bits("x"), Err(RadixError::InvalidDigit { .. })));
    }

    #[test]
    fn nibble_expansion() {
        assert_eq!(hex_to_bits("F").unwrap().to_string(), "1111");
        assert_eq!(hex_to_bits("63").unwrap().to_string(), "01100011");
        let bits = hex_to_bits("63727970746F").unwrap();
        assert_eq!(bits.len(), 48);
        assert_eq!(bits.to_string(), CRYPTO_BITS);
    }

    #[test]
    fn bits_back_to_hex() {
        let f = BitString::from_bit_str("1111").unwrap();
        assert_eq!(bits_to_hex(&f).unwrap(), "F");
        let b = BitString::from_bit_str("01100011").unwrap();
        assert_eq!(bits_to_hex(&b).unwrap(), "63");
        assert_eq!(bits_to_hex(&BitString::new()).unwrap(), "");
        let odd = BitString::from_bit_str("101").unwrap();
        assert_eq!(bits_to_hex(&odd), Err(RadixError::LengthNotMultipleOf4(3)));
    }

    #[test]
    fn bytes_and_bits_agree() {
        let from_bytes = BitString::from_bytes(b"crypto");
        assert_eq!(from_bytes, hex_to_bits("63727970746F").unwrap());
        assert_eq!(from_bytes.to_bytes().unwrap(), b"crypto");
        assert!(BitString::from_bit_str("1010").unwrap().to_bytes().is_err());
    }

    proptest! {
        #[test]
        fn text_hex_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let hex = text_to_hex(&bytes);
            prop_assert_eq!(hex.len(), 2 * bytes.len());
            prop_assert_eq!(hex_to_text(&hex).unwrap(), bytes);
        }

        #[test]
        fn hex_bits_round_trip(hex in "[0-9a-fA-F]{0,200}") {
            let bits = hex_to_bits(&hex).unwrap();
            prop_assert_eq!(bits.len(), 4 * hex.len());
            prop_assert_eq!(bits_to_hex(&bits).unwrap(), hex.to_uppercase());
        }
    }
}
