//! End-to-end encryption and the `BDEA1` container.
//!
//! Standard mode: envelope → split → XOR → DNA coding → amplification → compression.
//! Paper mode reproduces the published worked example: the plaintext's bits are
//! DNA-coded directly, with no envelope, split or XOR. Paper-mode containers
//! carry no integrity check.
//!
//! The scheme is deterministic (no nonce). Equal plaintexts under equal key
//! material produce equal ciphertexts.

use thiserror::Error;

use crate::dna_codec::{decode_dna, decode_to_bytes, encode_bits, encode_bytes, CodingPattern};
use crate::dna_compress::{compress, decompress, CompressError, CompressedBlob};
use crate::frame_split::{build_envelope, combine_and_open, split_halves, xor_bytes, EnvelopeError};
use crate::keyex::KeyBundle;
use crate::pcr_sim::{amplify, deamplify, PcrError, PrimerPair};
use crate::radix_codec::{bits_to_hex, hex_to_bits, hex_to_text, text_to_hex, RadixError};
use crate::dna_codec::DnaError;

pub const CONTAINER_MAGIC: &[u8; 5] = b"BDEA1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Mode {
    Standard = 0x00,
    Paper = 0x01,
}

impl TryFrom<u8> for Mode {
    type Error = PipelineError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0x00 => Ok(Mode::Standard),
            0x01 => Ok(Mode::Paper),
            other => Err(PipelineError::UnknownMode(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("bad container magic")]
    BadContainerMagic,
    #[error("unknown container mode {0:#04x}")]
    UnknownMode(u8),
    #[error("plaintext too large: {0} bytes")]
    TooLarge(usize),
    #[error("de-amplified message has {0} bases, not a whole number of bytes")]
    RaggedMessage(usize),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Pcr(#[from] PcrError),
    #[error(transparent)]
    Compress(#[from] CompressError),
    #[error(transparent)]
    Radix(#[from] RadixError),
    #[error(transparent)]
    Dna(#[from] DnaError),
}

impl PipelineError {
    /// Wrong primers.
    pub fn is_pollution(&self) -> bool {
        matches!(self, PipelineError::Pcr(PcrError::BiologicalPollution(_)))
    }

    /// Wrong or corrupted `k_b` (envelope failed to validate).
    pub fn is_integrity(&self) -> bool {
        matches!(self, PipelineError::Envelope(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherContainer {
    pub mode: Mode,
    pub blob: CompressedBlob,
}

impl CipherContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let blob = self.blob.to_bytes();
        let mut out = Vec::with_capacity(6 + blob.len());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.push(self.mode as u8);
        out.extend_from_slice(&blob);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PipelineError> {
        if bytes.len() < 6 || &bytes[..5] != CONTAINER_MAGIC {
            return Err(PipelineError::BadContainerMagic);
        }
        Ok(Self {
            mode: Mode::try_from(bytes[5])?,
            blob: CompressedBlob::from_bytes(&bytes[6..])?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub primers: PrimerPair,
    pub pattern: CodingPattern,
}

impl KeyMaterial {
    pub fn new(primers: PrimerPair, pattern: CodingPattern) -> Self {
        Self { primers, pattern }
    }
}

// One symbol count must fit in u32; the amplified length is a safe upper bound.
fn check_amplified_size(message_bases: usize, km: &KeyMaterial, plain_len: usize) -> Result<(), PipelineError> {
    match message_bases.checked_mul(km.primers.block_len()) {
        Some(n) if n <= u32::MAX as usize => Ok(()),
        _ => Err(PipelineError::TooLarge(plain_len)),
    }
}

pub fn encrypt(plain: &[u8], km: &KeyMaterial) -> Result<(CipherContainer, KeyBundle), PipelineError> {
    let envelope = build_envelope(plain)?;
    let halves = split_halves(&envelope)?;
    let xored = xor_bytes(&halves.k_a, &halves.k_b)?;
    check_amplified_size(xored.len() * 4, km, plain.len())?;
    let dna = encode_bytes(&xored, &km.pattern);
    let amp = amplify(&dna, &km.primers);
    let container = CipherContainer {
        mode: Mode::Standard,
        blob: compress(&amp),
    };
    let bundle = KeyBundle {
        primers: km.primers.clone(),
        pattern: km.pattern,
        k_b: halves.k_b,
    };
    Ok((container, bundle))
}

/// The amplified (pre-compression) stream for the worked-example route.
pub fn amplify_paper_mode(plain: &[u8], km: &KeyMaterial) -> Result<crate::dna_codec::DnaSequence, PipelineError> {
    check_amplified_size(plain.len() * 4, km, plain.len())?;
    let bits = hex_to_bits(&text_to_hex(plain))?;
    let dna = encode_bits(&bits, &km.pattern)?;
    Ok(amplify(&dna, &km.primers))
}

pub fn encrypt_paper_mode(plain: &[u8], km: &KeyMaterial) -> Result<CipherContainer, PipelineError> {
    Ok(CipherContainer {
        mode: Mode::Paper,
        blob: compress(&amplify_paper_mode(plain, km)?),
    })
}

pub fn decrypt(container: &CipherContainer, kb: &KeyBundle) -> Result<Vec<u8>, PipelineError> {
    let amp = decompress(&container.blob)?;
    let dna = deamplify(&amp, &kb.primers)?;
    match container.mode {
        Mode::Standard => {
            let xored = decode_to_bytes(dna.bases(), &kb.pattern)
                .ok_or(PipelineError::RaggedMessage(dna.len()))?;
            Ok(combine_and_open(&xored, &kb.k_b)?)
        }
        Mode::Paper => {
            if dna.len() % 4 != 0 {
                return Err(PipelineError::RaggedMessage(dna.len()));
            }
            let hex = bits_to_hex(&decode_dna(&dna, &kb.pattern))?;
            Ok(hex_to_text(&hex)?)
        }
    }
}

/// Paper-mode decryption only needs the primers and pattern.
pub fn decrypt_paper_mode(container: &CipherContainer, km: &KeyMaterial) -> Result<Vec<u8>, PipelineError> {
    let kb = KeyBundle {
        primers: km.primers.clone(),
        pattern: km.pattern,
        k_b: Vec::new(),
    };
    decrypt(container, &kb)
}
