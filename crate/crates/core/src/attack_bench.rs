//! Desk-scale attacks on the primer layer.
//!
//! [`brute_force`] tries every primer pair up to a length bound and keeps the
//! ones that survive de-amplification and the envelope CRC. [`corruption_probe`]
//! measures how often a single-component key mutation is caught.
//!
//! Frequency analysis of the primer slots would recover the primers far faster
//! than brute force; that shortcut is deliberately not modeled here.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dna_codec::{decode_to_bytes, Base, CodingPattern};
use crate::dna_compress::decompress;
use crate::frame_split::combine_and_open;
use crate::keyex::KeyBundle;
use crate::pcr_sim::{deamplify_bases, Primer, PrimerPair};
use crate::pipeline::{decrypt, CipherContainer, Mode, PipelineError};

/// Largest primer length [`brute_force`] accepts.
pub const MAX_SEARCH_LEN: usize = 6;

/// Number of coding patterns, reported alongside the primer space.
pub const PATTERN_COUNT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("max_len {0} exceeds the search bound of {MAX_SEARCH_LEN}")]
    MaxLenExceeded(usize),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub trials: u64,
    /// Sorted.
    pub matches: Vec<PrimerPair>,
    pub elapsed: Duration,
}

/// Number of primer pairs with lengths exactly `l1` and `l2`: 4^(l1+l2).
/// `None` once the value no longer fits in a `u128`.
pub fn search_space(l1: u32, l2: u32) -> Option<u128> {
    4u128.checked_pow(l1.checked_add(l2)?)
}

fn primer_from_index(mut index: u64, len: usize) -> Primer {
    let mut bases = vec![Base::A; len];
    for slot in bases.iter_mut().rev() {
        *slot = Base::ALL[(index & 3) as usize];
        index >>= 2;
    }
    Primer::new(bases).expect("1..=MAX_SEARCH_LEN bases")
}

fn slot_matches(slot: &[Base], mut index: u64) -> bool {
    slot.iter().rev().all(|&b| {
        let ok = b.index() as u64 == index & 3;
        index >>= 2;
        ok
    })
}

fn recognizes(amp: &[Base], pp: &PrimerPair, mode: Mode, k_b: &[u8], pattern: &CodingPattern) -> bool {
    let Ok(dna) = deamplify_bases(amp, pp) else {
        return false;
    };
    let Some(bytes) = decode_to_bytes(dna.bases(), pattern) else {
        return false;
    };
    match mode {
        Mode::Standard => combine_and_open(&bytes, k_b).is_ok(),
        // No integrity check exists in paper mode; de-amplification is the only signal.
        Mode::Paper => true,
    }
}

/// Tries every primer pair with `1 <= |p1|, |p2| <= max_len`.
///
/// The search is parallel over candidates; the report does not depend on the
/// thread count.
pub fn brute_force(
    container: &CipherContainer,
    k_b: &[u8],
    pattern: &CodingPattern,
    max_len: usize,
) -> Result<SearchReport, AttackError> {
    if max_len > MAX_SEARCH_LEN {
        return Err(AttackError::MaxLenExceeded(max_len));
    }
    let start = Instant::now();
    let amp = decompress(&container.blob).map_err(PipelineError::from)?;
    let amp = amp.bases();
    let mut trials = 0u64;
    let mut matches = Vec::new();

    for l1 in 1..=max_len {
        for l2 in 1..=max_len {
            let space = 1u64 << (2 * (l1 + l2));
            trials += space;
            let block = 1 + l1 + 2 * l2;
            if amp.len() % block != 0 {
                continue;
            }
            let found: Vec<PrimerPair> = (0..space)
                .into_par_iter()
                .filter(|&candidate| {
                    let i1 = candidate >> (2 * l2);
                    let i2 = candidate & ((1 << (2 * l2)) - 1);
                    // Primer slots of the first block, checked before the full path.
                    amp.is_empty()
                        || (slot_matches(&amp[1..1 + l2], i2)
                            && slot_matches(&amp[1 + l2..1 + l2 + l1], i1)
                            && slot_matches(&amp[1 + l2 + l1..block], i2))
                })
                .map(|candidate| PrimerPair {
                    p1: primer_from_index(candidate >> (2 * l2), l1),
                    p2: primer_from_index(candidate & ((1 << (2 * l2)) - 1), l2),
                })
                .filter(|pp| recognizes(amp, pp, container.mode, k_b, pattern))
                .collect();
            matches.extend(found);
        }
    }
    matches.sort();
    for m in matches.iter().filter(|m| m.is_degenerate()) {
        log::info!("match with identical primers: {m}");
    }
    Ok(SearchReport {
        trials,
        matches,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    /// Change one base of primer 1 or primer 2.
    Primer,
    /// Swap two entries of the coding pattern.
    Pattern,
    /// XOR one byte of `k_b` with a non-zero value.
    KeyB,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [MutationKind::Primer, MutationKind::Pattern, MutationKind::KeyB];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    /// Whether the unmutated bundle decrypts; excluded from the fraction.
    pub control_ok: bool,
    pub trials: usize,
    pub failures: usize,
    pub pollution: usize,
    pub integrity: usize,
    pub fraction: f64,
}

pub fn mutate(kb: &KeyBundle, kind: MutationKind, rng: &mut impl Rng) -> KeyBundle {
    let mut out = kb.clone();
    match kind {
        MutationKind::Primer => {
            let primer = if rng.gen() {
                &mut out.primers.p1
            } else {
                &mut out.primers.p2
            };
            let mut bases = primer.bases().to_vec();
            let pos = rng.gen_range(0..bases.len());
            let others: Vec<Base> = Base::ALL.into_iter().filter(|&b| b != bases[pos]).collect();
            bases[pos] = *others.choose(rng).unwrap();
            *primer = Primer::new(bases).expect("same length");
        }
        MutationKind::Pattern => {
            let i = rng.gen_range(0..4);
            let j = (i + rng.gen_range(1..4)) % 4;
            out.pattern = out.pattern.swapped(i, j);
        }
        MutationKind::KeyB => {
            let pos = rng.gen_range(0..out.k_b.len());
            out.k_b[pos] ^= rng.gen_range(1..=255u8);
        }
    }
    out
}

/// Applies `mutations` random single-component mutations drawn from `kinds` and
/// reports the fraction for which decryption fails. `KeyB` is skipped for empty keys.
pub fn corruption_probe(
    container: &CipherContainer,
    kb: &KeyBundle,
    mutations: usize,
    seed: u64,
    kinds: &[MutationKind],
) -> ProbeReport {
    let control_ok = decrypt(container, kb).is_ok();
    let usable: Vec<MutationKind> = kinds
        .iter()
        .copied()
        .filter(|k| *k != MutationKind::KeyB || !kb.k_b.is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        control_ok,
        trials: 0,
        failures: 0,
        pollution: 0,
        integrity: 0,
        fraction: 0.0,
    };
    if usable.is_empty() {
        return report;
    }
    for _ in 0..mutations {
        let kind = *usable.choose(&mut rng).unwrap();
        let mutated = mutate(kb, kind, &mut rng);
        report.trials += 1;
        if let Err(e) = decrypt(container, &mutated) {
            report.failures += 1;
            report.pollution += e.is_pollution() as usize;
            report.integrity += e.is_integrity() as usize;
        }
    }
    report.fraction = report.failures as f64 / report.trials as f64;
    report
}
