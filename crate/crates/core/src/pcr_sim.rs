//! Simulated PCR amplification.
//!
//! Every message base `b` is expanded into the block `b · p2 · p1 · p2`.
//! De-amplification checks that every primer slot of every block holds the
//! expected primer and returns the leading bases. Any mismatch is reported as
//! biological pollution.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dna_codec::{Base, DnaError, DnaSequence};

pub const MAX_PRIMER_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcrError {
    #[error("primer length {0} outside 1..={MAX_PRIMER_LEN}")]
    PrimerLength(usize),
    #[error(transparent)]
    Dna(#[from] DnaError),
    #[error("biological pollution: {0}")]
    BiologicalPollution(Pollution),
}

/// Where de-amplification went wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pollution {
    Length { len: usize, block_len: usize },
    Slot { block: usize },
}

impl fmt::Display for Pollution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pollution::Length { len, block_len } => {
                write!(f, "{len} bases is not a whole number of {block_len}-base blocks")
            }
            Pollution::Slot { block } => write!(f, "primer slot mismatch in block {block}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Primer(Vec<Base>);

impl Primer {
    pub fn new(bases: Vec<Base>) -> Result<Self, PcrError> {
        if bases.is_empty() || bases.len() > MAX_PRIMER_LEN {
            return Err(PcrError::PrimerLength(bases.len()));
        }
        Ok(Self(bases))
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
}

impl FromStr for Primer {
    type Err = PcrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Primer::new(s.parse::<DnaSequence>()?.into_vec())
    }
}

impl fmt::Display for Primer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{}", b.as_char()))
    }
}

impl fmt::Debug for Primer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Primer({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimerPair {
    pub p1: Primer,
    pub p2: Primer,
}

impl PrimerPair {
    /// Identical primers are legal but collapse two keys into one; a warning is logged.
    pub fn new(p1: Primer, p2: Primer) -> Self {
        let pair = Self { p1, p2 };
        if pair.is_degenerate() {
            log::warn!("primer1 and primer2 are identical ({})", pair.p1);
        }
        pair
    }

    pub fn is_degenerate(&self) -> bool {
        self.p1 == self.p2
    }

    pub fn block_len(&self) -> usize {
        block_len(self)
    }
}

impl fmt::Display for PrimerPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p1, self.p2)
    }
}

pub fn block_len(pp: &PrimerPair) -> usize {
    1 + pp.p1.len() + 2 * pp.p2.len()
}

fn block_template(pp: &PrimerPair) -> Vec<Base> {
    let mut t = Vec::with_capacity(block_len(pp) - 1);
    t.extend_from_slice(pp.p2.bases());
    t.extend_from_slice(pp.p1.bases());
    t.extend_from_slice(pp.p2.bases());
    t
}

pub fn amplify(msg: &DnaSequence, pp: &PrimerPair) -> DnaSequence {
    let tail = block_template(pp);
    let mut out = DnaSequence::with_capacity(msg.len() * block_len(pp));
    for &b in msg.bases() {
        out.push(b);
        out.extend_from_slice(&tail);
    }
    out
}

pub fn deamplify(amp: &DnaSequence, pp: &PrimerPair) -> Result<DnaSequence, PcrError> {
    deamplify_bases(amp.bases(), pp)
}

pub fn deamplify_bases(amp: &[Base], pp: &PrimerPair) -> Result<DnaSequence, PcrError> {
    let block = block_len(pp);
    if amp.len() % block != 0 {
        return Err(PcrError::BiologicalPollution(Pollution::Length {
            len: amp.len(),
            block_len: block,
        }));
    }
    let tail = block_template(pp);
    let mut out = DnaSequence::with_capacity(amp.len() / block);
    for (i, chunk) in amp.chunks_exact(block).enumerate() {
        if chunk[1..] != tail[..] {
            return Err(PcrError::BiologicalPollution(Pollution::Slot { block: i }));
        }
        out.push(chunk[0]);
    }
    Ok(out)
}
