//! Plaintext envelope, half split and the XOR layer.
//!
//! Envelope layout (frozen, version 1):
//!
//! ```text
//! offset  size  field
//! 0       2     magic 0xBD 0xEA
//! 2       1     version 0x01
//! 3       4     plain_len, u32 big-endian
//! 7       4     CRC-32 (IEEE) of the plaintext, u32 big-endian
//! 11      n     plaintext
//! 11+n    0|1   zero padding to an even total length
//! ```
//!
//! The first half of the serialized envelope is `k_a`, the second half is `k_b`.
//! Only `k_a ^ k_b` travels in the ciphertext; `k_b` travels in the key bundle.
//! The CRC is an integrity hint for wrong-key detection, not a MAC.

use thiserror::Error;

pub const ENVELOPE_MAGIC: [u8; 2] = [0xBD, 0xEA];
pub const ENVELOPE_VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("plaintext of {0} bytes does not fit a 32-bit length field")]
    TooLarge(usize),
    #[error("envelope has odd length {0}")]
    OddLength(usize),
    #[error("length mismatch: {left} vs {right} bytes")]
    LengthMismatch { left: usize, right: usize },
    #[error("envelope is truncated ({0} bytes)")]
    Truncated(usize),
    #[error("bad envelope magic")]
    BadMagic,
    #[error("unsupported envelope version {0:#04x}")]
    BadVersion(u8),
    #[error("declared plaintext length {declared} inconsistent with envelope of {total} bytes")]
    BadLength { declared: u32, total: usize },
    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
}

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
pub fn crc32(data: &[u8]) -> u32 {
    crc32fast::hash(data)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfPair {
    pub k_a: Vec<u8>,
    pub k_b: Vec<u8>,
}

fn padded_len(plain_len: usize) -> usize {
    let raw = HEADER_LEN + plain_len;
    raw + raw % 2
}

pub fn build_envelope(plain: &[u8]) -> Result<Vec<u8>, EnvelopeError> {
    let plain_len = u32::try_from(plain.len()).map_err(|_| EnvelopeError::TooLarge(plain.len()))?;
    let mut out = Vec::with_capacity(padded_len(plain.len()));
    out.extend_from_slice(&ENVELOPE_MAGIC);
    out.push(ENVELOPE_VERSION);
    out.extend_from_slice(&plain_len.to_be_bytes());
    out.extend_from_slice(&crc32(plain).to_be_bytes());
    out.extend_from_slice(plain);
    if out.len() % 2 == 1 {
        out.push(0);
    }
    Ok(out)
}

pub fn split_halves(envelope: &[u8]) -> Result<HalfPair, EnvelopeError> {
    if envelope.len() % 2 != 0 {
        return Err(EnvelopeError::OddLength(envelope.len()));
    }
    let (k_a, k_b) = envelope.split_at(envelope.len() / 2);
    Ok(HalfPair {
        k_a: k_a.to_vec(),
        k_b: k_b.to_vec(),
    })
}

pub fn xor_bytes(a: &[u8], b: &[u8]) -> Result<Vec<u8>, EnvelopeError> {
    if a.len() != b.len() {
        return Err(EnvelopeError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// Validates a serialized envelope and returns its plaintext.
pub fn open_envelope(envelope: &[u8]) -> Result<Vec<u8>, EnvelopeError> {
    if envelope.len() < HEADER_LEN {
        return Err(EnvelopeError::Truncated(envelope.len()));
    }
    if envelope[..2] != ENVELOPE_MAGIC {
        return Err(EnvelopeError::BadMagic);
    }
    if envelope[2] != ENVELOPE_VERSION {
        return Err(EnvelopeError::BadVersion(envelope[2]));
    }
    let declared = u32::from_be_bytes(envelope[3..7].try_into().unwrap());
    let stored = u32::from_be_bytes(envelope[7..11].try_into().unwrap());
    let plain_end = HEADER_LEN as u64 + declared as u64;
    // Exactly one valid total length per plaintext length, and padding must be zero.
    if padded_len(declared as usize) != envelope.len() || plain_end > envelope.len() as u64 {
        return Err(EnvelopeError::BadLength {
            declared,
            total: envelope.len(),
        });
    }
    let plain_end = plain_end as usize;
    if envelope[plain_end..].iter().any(|&b| b != 0) {
        return Err(EnvelopeError::BadLength {
            declared,
            total: envelope.len(),
        });
    }
    let plain = &envelope[HEADER_LEN..plain_end];
    let computed = crc32(plain);
    if computed != stored {
        return Err(EnvelopeError::CrcMismatch { stored, computed });
    }
    Ok(plain.to_vec())
}

/// Recovers `k_a = xored ^ k_b`, reassembles the envelope and opens it.
pub fn combine_and_open(xored: &[u8], k_b: &[u8]) -> Result<Vec<u8>, EnvelopeError> {
    let mut envelope = xor_bytes(xored, k_b)?;
    envelope.extend_from_slice(k_b);
    open_envelope(&envelope)
}
