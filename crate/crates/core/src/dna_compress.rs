//! Order-0 canonical Huffman coding over {A, C, G, T}.
//!
//! Blob layout (frozen):
//!
//! ```text
//! 0xDC 0x01 | count_A | count_C | count_G | count_T | body
//!           (four u32 big-endian)
//! ```
//!
//! The body is the MSB-first concatenation of codewords, zero-padded to a byte
//! boundary. Code lengths are rebuilt from the counts, so the tree construction
//! below must stay bit-for-bit deterministic.

use thiserror::Error;

use crate::dna_codec::{Base, DnaSequence};

pub const BLOB_MAGIC: [u8; 2] = [0xDC, 0x01];
pub const BLOB_HEADER_LEN: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompressError {
    #[error("bad compressed-blob magic")]
    BadMagic,
    #[error("compressed blob header truncated ({0} bytes)")]
    TruncatedHeader(usize),
    #[error("compressed body ends before all symbols were decoded")]
    TruncatedBody,
    #[error("non-zero padding or trailing bytes after the last symbol")]
    MalformedPadding,
    #[error("decoded symbol counts do not match the header")]
    CountMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    /// Occurrences of A, C, G, T in that order.
    pub counts: [u32; 4],
    pub body: Vec<u8>,
}

impl CompressedBlob {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BLOB_HEADER_LEN + self.body.len());
        out.extend_from_slice(&BLOB_MAGIC);
        for c in self.counts {
            out.extend_from_slice(&c.to_be_bytes());
        }
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CompressError> {
        if bytes.len() < BLOB_HEADER_LEN {
            return Err(CompressError::TruncatedHeader(bytes.len()));
        }
        if bytes[..2] != BLOB_MAGIC {
            return Err(CompressError::BadMagic);
        }
        let mut counts = [0u32; 4];
        for (i, c) in counts.iter_mut().enumerate() {
            let at = 2 + 4 * i;
            *c = u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap());
        }
        Ok(Self {
            counts,
            body: bytes[BLOB_HEADER_LEN..].to_vec(),
        })
    }

    pub fn total_symbols(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Number of meaningful bits in the body (excludes padding).
    pub fn body_bits(&self) -> u64 {
        let lens = code_lengths(&self.counts);
        self.counts
            .iter()
            .zip(lens)
            .map(|(&c, l)| c as u64 * l as u64)
            .sum()
    }
}

/// Huffman code length per symbol (0 for absent symbols).
///
/// Merge order picks the two lightest nodes; ties go to leaves in symbol
/// order A<C<G<T, then to merged nodes in creation order.
pub fn code_lengths(counts: &[u32; 4]) -> [u8; 4] {
    struct Node {
        weight: u64,
        rank: usize,
        symbols: Vec<usize>,
    }

    let mut lens = [0u8; 4];
    let mut nodes: Vec<Node> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| Node {
            weight: c as u64,
            rank: s,
            symbols: vec![s],
        })
        .collect();

    match nodes.len() {
        0 => return lens,
        1 => {
            lens[nodes[0].symbols[0]] = 1;
            return lens;
        }
        _ => {}
    }

    let mut next_rank = 4;
    while nodes.len() > 1 {
        nodes.sort_by_key(|n| (n.weight, n.rank));
        let a = nodes.remove(0);
        let b = nodes.remove(0);
        let mut symbols = a.symbols;
        symbols.extend(b.symbols);
        for &s in &symbols {
            lens[s] += 1;
        }
        nodes.push(Node {
            weight: a.weight + b.weight,
            rank: next_rank,
            symbols,
        });
        next_rank += 1;
    }
    lens
}

/// Canonical codewords: shorter first, symbol order within a length.
pub fn canonical_codes(lens: &[u8; 4]) -> [u8; 4] {
    let mut order: Vec<usize> = (0..4).filter(|&s| lens[s] > 0).collect();
    order.sort_by_key(|&s| (lens[s], s));
    let mut codes = [0u8; 4];
    let mut code = 0u8;
    let mut prev_len = order.first().map_or(0, |&s| lens[s]);
    for s in order {
        code <<= lens[s] - prev_len;
        codes[s] = code;
        code += 1;
        prev_len = lens[s];
    }
    codes
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    filled: u32,
}

impl BitWriter {
    fn with_capacity(bits: u64) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8) as usize),
            acc: 0,
            filled: 0,
        }
    }

    fn write(&mut self, code: u8, len: u8) {
        for shift in (0..len).rev() {
            self.acc = (self.acc << 1) | ((code >> shift) & 1);
            self.filled += 1;
            if self.filled == 8 {
                self.bytes.push(self.acc);
                self.acc = 0;
                self.filled = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push(self.acc << (8 - self.filled));
        }
        self.bytes
    }
}

/// # Panics
///
/// Panics if any base occurs more than `u32::MAX` times.
pub fn compress(dna: &DnaSequence) -> CompressedBlob {
    let mut tally = [0u64; 4];
    for &b in dna.bases() {
        tally[b.index()] += 1;
    }
    let counts = tally.map(|c| u32::try_from(c).expect("symbol count exceeds u32"));
    let lens = code_lengths(&counts);
    let codes = canonical_codes(&lens);
    let bits: u64 = (0..4).map(|s| tally[s] * lens[s] as u64).sum();
    let mut writer = BitWriter::with_capacity(bits);
    for &b in dna.bases() {
        writer.write(codes[b.index()], lens[b.index()]);
    }
    CompressedBlob {
        counts,
        body: writer.finish(),
    }
}

pub fn decompress(blob: &CompressedBlob) -> Result<DnaSequence, CompressError> {
    let total = blob.total_symbols();
    let available = blob.body.len() as u64 * 8;
    // Every symbol costs at least one bit.
    if total > available {
        return Err(CompressError::TruncatedBody);
    }
    let lens = code_lengths(&blob.counts);
    let codes = canonical_codes(&lens);

    // (len, code) -> symbol; codes are at most 3 bits wide.
    let mut table = [[None::<Base>; 8]; 4];
    for s in 0..4 {
        if lens[s] > 0 {
            table[lens[s] as usize][codes[s] as usize] = Some(Base::ALL[s]);
        }
    }

    let mut out = DnaSequence::with_capacity(total as usize);
    let mut seen = [0u32; 4];
    let mut pos = 0u64;
    let bit_at = |i: u64| (blob.body[(i / 8) as usize] >> (7 - (i % 8))) & 1;
    while (out.len() as u64) < total {
        let mut code = 0usize;
        let mut len = 0usize;
        let symbol = loop {
            if pos >= available {
                return Err(CompressError::TruncatedBody);
            }
            code = (code << 1) | bit_at(pos) as usize;
            pos += 1;
            len += 1;
            if let Some(b) = table[len][code] {
                break b;
            }
            if len == 3 {
                // No codeword matches; only possible with a tampered header or body.
                return Err(CompressError::CountMismatch);
            }
        };
        seen[symbol.index()] += 1;
        out.push(symbol);
    }

    if pos.div_ceil(8) != blob.body.len() as u64 {
        return Err(CompressError::MalformedPadding);
    }
    if (pos..available).any(|i| bit_at(i) != 0) {
        return Err(CompressError::MalformedPadding);
    }
    if seen != blob.counts {
        return Err(CompressError::CountMismatch);
    }
    Ok(out)
}
