//! Bi-serial DNA encryption.
//!
//! Plaintext is wrapped in a CRC-checked envelope, split into halves `k_a` and
//! `k_b`, XORed, DNA-coded under one of 24 coding patterns, amplified with a
//! primer pair and Huffman-compressed. The primers, the pattern and `k_b` form
//! the key bundle, which travels under a Diffie-Hellman derived keystream.
//!
//! Nothing here is cryptographically strong. The crate is a faithful,
//! testable model of the scheme, not a tool for protecting data.

pub mod attack_bench;
pub mod dna_codec;
pub mod dna_compress;
pub mod frame_split;
pub mod kat;
pub mod keyex;
pub mod netproto;
pub mod pcr_sim;
pub mod pipeline;
pub mod radix_codec;

pub use attack_bench::{brute_force, corruption_probe, search_space, MutationKind, ProbeReport, SearchReport};
pub use dna_codec::{default_pattern, enumerate_patterns, pattern_from_string, Base, CodingPattern, DnaSequence};
pub use dna_compress::{compress, decompress, CompressedBlob};
pub use frame_split::{crc32, EnvelopeError};
pub use keyex::{DhKeyPair, DhParams, KeyBundle, SharedSecret};
pub use netproto::{recv_session, send_session, serve, ErrorReason, Frame, FrameType, NetError};
pub use pcr_sim::{amplify, deamplify, PcrError, Primer, PrimerPair};
pub use pipeline::{decrypt, encrypt, encrypt_paper_mode, CipherContainer, KeyMaterial, Mode, PipelineError};
pub use radix_codec::BitString;
