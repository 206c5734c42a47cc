//! Toy Diffie-Hellman over a prime below 2^62, plus key-bundle wrapping.
//!
//! This is educational-strength only: the modulus is tiny and the keystream
//! is xorshift64*, which is not a cryptographic generator.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::dna_codec::{pattern_from_string, Base, CodingPattern};
use crate::pcr_sim::{Primer, PrimerPair, MAX_PRIMER_LEN};

/// Exclusive upper bound on moduli.
pub const MODULUS_LIMIT: u64 = 1 << 62;

/// Mersenne prime 2^61 - 1.
pub const DEFAULT_P: u64 = (1 << 61) - 1;
pub const DEFAULT_G: u64 = 3;

const KEYSTREAM_ZERO_SEED: u64 = 0x9E37_79B9_7F4A_7C15;
const KEYSTREAM_MULTIPLIER: u64 = 0x2545_F491_4F6C_DD1D;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyexError {
    #[error("modulus {0} outside [2, 2^62)")]
    ModulusOutOfRange(u64),
    #[error("modulus {0} is not an odd prime in [3, 2^62)")]
    NotPrime(u64),
    #[error("generator {g} outside [2, {p})")]
    GeneratorOutOfRange { g: u64, p: u64 },
    #[error("private exponent {x} outside [1, {p} - 1)")]
    PrivateOutOfRange { x: u64, p: u64 },
    #[error("peer public value {value} outside (0, {p})")]
    PublicValueOutOfRange { value: u64, p: u64 },
    #[error("malformed key bundle: {0}")]
    MalformedBundle(&'static str),
}

pub fn modpow(base: u64, exp: u64, m: u64) -> Result<u64, KeyexError> {
    if !(2..MODULUS_LIMIT).contains(&m) {
        return Err(KeyexError::ModulusOutOfRange(m));
    }
    Ok(modpow_unchecked(base, exp, m))
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn modpow_unchecked(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod(result, b, m);
        }
        b = mulmod(b, b, m);
        exp >>= 1;
    }
    result
}

/// Miller-Rabin with the first twelve prime bases, which is exact for all u64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in BASES {
        let mut x = modpow_unchecked(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DhParams {
    p: u64,
    g: u64,
}

impl DhParams {
    pub fn new(p: u64, g: u64) -> Result<Self, KeyexError> {
        if !(3..MODULUS_LIMIT).contains(&p) {
            return Err(KeyexError::ModulusOutOfRange(p));
        }
        if p % 2 == 0 || !is_prime(p) {
            return Err(KeyexError::NotPrime(p));
        }
        if !(2..p).contains(&g) {
            return Err(KeyexError::GeneratorOutOfRange { g, p });
        }
        Ok(Self { p, g })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn keypair(&self, private: u64) -> Result<DhKeyPair, KeyexError> {
        if !(1..self.p - 1).contains(&private) {
            return Err(KeyexError::PrivateOutOfRange {
                x: private,
                p: self.p,
            });
        }
        Ok(DhKeyPair {
            private,
            public: modpow_unchecked(self.g, private, self.p),
        })
    }

    /// Draws a private exponent in `[1, p-1)` from a seeded ChaCha20 stream.
    pub fn keypair_from_seed(&self, seed: u64) -> DhKeyPair {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let private = rng.gen_range(1..self.p - 1);
        self.keypair(private).expect("sampled in range")
    }
}

impl Default for DhParams {
    fn default() -> Self {
        Self::new(DEFAULT_P, DEFAULT_G).expect("default parameters are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DhKeyPair {
    pub private: u64,
    pub public: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedSecret(pub u64);

pub fn dh_shared(params: &DhParams, my_private: u64, peer_public: u64) -> Result<SharedSecret, KeyexError> {
    if !(1..params.p).contains(&peer_public) {
        return Err(KeyexError::PublicValueOutOfRange {
            value: peer_public,
            p: params.p,
        });
    }
    Ok(SharedSecret(modpow_unchecked(peer_public, my_private, params.p)))
}

/// xorshift64* keystream seeded from the shared secret. Not cryptographically secure.
pub fn keystream(s: SharedSecret, n: usize) -> Vec<u8> {
    let mut state = if s.0 == 0 { KEYSTREAM_ZERO_SEED } else { s.0 };
    let mut out = Vec::with_capacity(n + 8);
    while out.len() < n {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        out.extend_from_slice(&state.wrapping_mul(KEYSTREAM_MULTIPLIER).to_be_bytes());
    }
    out.truncate(n);
    out
}

/// The three transported keys (primer 1, primer 2, hexadecimal key `k_b`) plus the coding pattern.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyBundle {
    pub primers: PrimerPair,
    pub pattern: CodingPattern,
    pub k_b: Vec<u8>,
}

impl fmt::Debug for KeyBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyBundle")
            .field("primer1", &self.primers.p1.to_string())
            .field("primer2", &self.primers.p2.to_string())
            .field("pattern", &self.pattern.to_string())
            .field("k_b_len", &self.k_b.len())
            .finish()
    }
}

impl KeyBundle {
    /// Plain (unwrapped) layout, also the `.bdk` file format:
    /// `len1 | primer1 ASCII | len2 | primer2 ASCII | pattern (4 ASCII) | u32 BE len | k_b`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.primers.p1.len() + self.primers.p2.len() + self.k_b.len());
        for primer in [&self.primers.p1, &self.primers.p2] {
            out.push(primer.len() as u8);
            out.extend(primer.bases().iter().map(|b| b.as_char() as u8));
        }
        out.extend(self.pattern.to_string().bytes());
        out.extend_from_slice(&(self.k_b.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.k_b);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyexError> {
        let mut rest = bytes;
        let mut take = |n: usize, what: &'static str| -> Result<&[u8], KeyexError> {
            if rest.len() < n {
                return Err(KeyexError::MalformedBundle(what));
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };

        let mut primers = Vec::with_capacity(2);
        for _ in 0..2 {
            let len = take(1, "truncated primer length")?[0] as usize;
            if len == 0 || len > MAX_PRIMER_LEN {
                return Err(KeyexError::MalformedBundle("primer length out of range"));
            }
            // Strict uppercase alphabet.
            let bases = take(len, "truncated primer")?
                .iter()
                .map(|&c| match c {
                    b'A' | b'C' | b'G' | b'T' => Base::from_ascii(c),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or(KeyexError::MalformedBundle("primer is not over ACGT"))?;
            primers.push(Primer::new(bases).expect("length checked"));
        }
        let pattern_bytes = take(4, "truncated pattern")?;
        if !pattern_bytes.iter().all(|c| b"ACGT".contains(c)) {
            return Err(KeyexError::MalformedBundle("pattern is not over ACGT"));
        }
        let pattern = pattern_from_string(std::str::from_utf8(pattern_bytes).expect("ASCII"))
            .map_err(|_| KeyexError::MalformedBundle("pattern is not a permutation"))?;
        let kb_len = u32::from_be_bytes(take(4, "truncated key length")?.try_into().unwrap()) as usize;
        let k_b = take(kb_len, "truncated key")?.to_vec();
        if !rest.is_empty() {
            return Err(KeyexError::MalformedBundle("trailing bytes"));
        }
        let p2 = primers.pop().unwrap();
        let p1 = primers.pop().unwrap();
        Ok(Self {
            primers: PrimerPair { p1, p2 },
            pattern,
            k_b,
        })
    }
}

pub fn wrap_bundle(kb: &KeyBundle, s: SharedSecret) -> Vec<u8> {
    let mut bytes = kb.to_bytes();
    let stream = keystream(s, bytes.len());
    for (b, k) in bytes.iter_mut().zip(stream) {
        *b ^= k;
    }
    bytes
}

/// Validation can pass by chance under a wrong secret; the envelope CRC is the final check.
pub fn unwrap_bundle(wrapped: &[u8], s: SharedSecret) -> Result<KeyBundle, KeyexError> {
    let plain: Vec<u8> = wrapped
        .iter()
        .zip(keystream(s, wrapped.len()))
        .map(|(b, k)| b ^ k)
        .collect();
    KeyBundle::from_bytes(&plain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dna_codec::{default_pattern, enumerate_patterns};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Repeated multiplication; only usable for small exponents.
    fn modpow_oracle(base: u64, exp: u64, m: u64) -> u64 {
        (0..exp).fold(1 % m, |acc, _| acc * base % m)
    }

    /// Keystream recurrence written with u128 masking instead of wrapping ops.
    fn keystream_oracle(seed: u64, n: usize) -> Vec<u8> {
        let mask = (1u128 << 64) - 1;
        let mut x: u128 = if seed == 0 { 0x9E3779B97F4A7C15 } else { seed as u128 };
        let mut out = Vec::new();
        while out.len() < n {
            x ^= x >> 12;
            x = (x ^ (x << 25)) & mask;
            x ^= x >> 27;
            let y = (x * 0x2545F4914F6CDD1D) & mask;
            for i in (0..8).rev() {
                out.push((y >> (8 * i)) as u8);
            }
        }
        out.truncate(n);
        out
    }

    #[test]
    fn modpow_vectors() {
        assert_eq!(modpow(5, 6, 23).unwrap(), 8);
        assert_eq!(modpow(5, 15, 23).unwrap(), 19);
        assert_eq!(modpow_oracle(5, 6, 23), 8);
        assert_eq!(modpow_oracle(5, 15, 23), 19);
        assert_eq!(modpow(7, 0, 11).unwrap(), 1);
        assert_eq!(modpow(7, 0, 2).unwrap(), 1);
        assert_eq!(modpow(1, 5, 1), Err(KeyexError::ModulusOutOfRange(1)));
        assert_eq!(modpow(1, 5, 1 << 62), Err(KeyexError::ModulusOutOfRange(1 << 62)));
        for exp in 0..200 {
            assert_eq!(modpow(123_456_789, exp, DEFAULT_P).unwrap(), {
                let mut acc = 1u128;
                for _ in 0..exp {
                    acc = acc * 123_456_789 % DEFAULT_P as u128;
                }
                acc as u64
            });
        }
    }

    #[test]
    fn toy_exchange() {
        let params = DhParams::new(23, 5).unwrap();
        let alice = params.keypair(6).unwrap();
        let bob = params.keypair(15).unwrap();
        assert_eq!((alice.public, bob.public), (8, 19));
        assert_eq!(dh_shared(&params, 6, 19).unwrap(), SharedSecret(2));
        assert_eq!(dh_shared(&params, 15, 8).unwrap(), SharedSecret(2));
        assert_eq!(modpow_oracle(19, 6, 23), 2);
        assert_eq!(modpow_oracle(8, 15, 23), 2);
        assert_eq!(dh_shared(&params, 1, 17).unwrap(), SharedSecret(17));
        assert!(matches!(
            dh_shared(&params, 6, 0),
            Err(KeyexError::PublicValueOutOfRange { .. })
        ));
        assert!(dh_shared(&params, 6, 23).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(DhParams::new(23, 5).is_ok());
        assert!(DhParams::default().p() == DEFAULT_P);
        assert_eq!(DhParams::new(2, 1), Err(KeyexError::ModulusOutOfRange(2)));
        assert_eq!(DhParams::new(21, 5), Err(KeyexError::NotPrime(21)));
        assert_eq!(DhParams::new(1 << 62, 5), Err(KeyexError::ModulusOutOfRange(1 << 62)));
        assert!(matches!(DhParams::new(23, 23), Err(KeyexError::GeneratorOutOfRange { .. })));
        assert!(matches!(DhParams::new(23, 1), Err(KeyexError::GeneratorOutOfRange { .. })));
        let params = DhParams::new(23, 5).unwrap();
        assert!(params.keypair(0).is_err());
        assert!(params.keypair(22).is_err());
    }

    #[test]
    fn primality_against_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(DEFAULT_P));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(!is_prime(DEFAULT_P - 2));
    }

    #[test]
    fn seeded_keypairs_are_deterministic() {
        let params = DhParams::default();
        let a = params.keypair_from_seed(42);
        assert_eq!(a, params.keypair_from_seed(42));
        assert_ne!(a, params.keypair_from_seed(43));
        assert!(a.private >= 1 && a.private < params.p() - 1);
        assert_eq!(a.public, modpow(params.g(), a.private, params.p()).unwrap());
    }

    #[test]
    fn keystream_matches_oracle() {
        assert!(keystream(SharedSecret(2), 0).is_empty());
        assert_eq!(keystream(SharedSecret(2), 32), keystream_oracle(2, 32));
        assert_eq!(keystream(SharedSecret(0), 19), keystream_oracle(0, 19));
        assert_eq!(keystream(SharedSecret(u64::MAX), 40), keystream_oracle(u64::MAX, 40));
        let long = keystream(SharedSecret(7), 16);
        assert_eq!(&long[..8], &keystream(SharedSecret(7), 8)[..]);
        assert_ne!(keystream(SharedSecret(0), 8), vec![0; 8]);
    }

    fn worked_example_bundle() -> KeyBundle {
        KeyBundle {
            primers: PrimerPair::new("A".parse().unwrap(), "T".parse().unwrap()),
            pattern: default_pattern(),
            k_b: vec![0x70, 0x74, 0x6F],
        }
    }

    #[test]
    fn bundle_layout() {
        let bytes = worked_example_bundle().to_bytes();
        assert_eq!(
            bytes,
            [1, b'A', 1, b'T', b'A', b'T', b'G', b'C', 0, 0, 0, 3, 0x70, 0x74, 0x6F]
        );
        assert_eq!(KeyBundle::from_bytes(&bytes).unwrap(), worked_example_bundle());
        let wrapped = wrap_bundle(&worked_example_bundle(), SharedSecret(2));
        assert_eq!(wrapped.len(), bytes.len());
        assert_ne!(wrapped, bytes);
        assert_eq!(unwrap_bundle(&wrapped, SharedSecret(2)).unwrap(), worked_example_bundle());
    }

    #[test]
    fn bundle_parse_errors() {
        let good = worked_example_bundle().to_bytes();
        let cases: Vec<Vec<u8>> = vec![
            vec![],
            good[..good.len() - 1].to_vec(),
            [&good[..], &[0]].concat(),
            {
                let mut b = good.clone();
                b[0] = 0;
                b
            },
            {
                let mut b = good.clone();
                b[1] = b'a';
                b
            },
            {
                let mut b = good.clone();
                b[5] = b'A';
                b
            },
        ];
        for case in cases {
            assert!(matches!(
                KeyBundle::from_bytes(&case),
                Err(KeyexError::MalformedBundle(_))
            ));
        }
    }

    #[test]
    fn wrong_secret_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let kb = worked_example_bundle();
        let wrapped = wrap_bundle(&kb, SharedSecret(2));
        let failures = (0..1000)
            .filter(|_| {
                let mut s: u64 = rand::Rng::gen_range(&mut rng, 0..MODULUS_LIMIT);
                if s == 2 {
                    s = 3;
                }
                unwrap_bundle(&wrapped, SharedSecret(s)).is_err()
            })
            .count();
        assert!(failures > 990, "only {failures} rejections");
    }

    fn bundle_strategy() -> impl Strategy<Value = KeyBundle> {
        let primer = proptest::collection::vec(0usize..4, 1..=64)
            .prop_map(|v| Primer::new(v.into_iter().map(|i| Base::ALL[i]).collect()).unwrap());
        (
            primer.clone(),
            primer,
            0usize..24,
            proptest::collection::vec(any::<u8>(), 0..200),
        )
            .prop_map(|(p1, p2, pat, k_b)| KeyBundle {
                primers: PrimerPair { p1, p2 },
                pattern: enumerate_patterns()[pat],
                k_b,
            })
    }

    proptest! {
        #[test]
        fn wrap_round_trip(kb in bundle_strategy(), s in any::<u64>()) {
            let wrapped = wrap_bundle(&kb, SharedSecret(s));
            prop_assert_eq!(unwrap_bundle(&wrapped, SharedSecret(s)).unwrap(), kb);
        }

        #[test]
        fn dh_symmetry(a in 1u64..DEFAULT_P - 1, b in 1u64..DEFAULT_P - 1) {
            let p = DEFAULT_P;
            let g = DEFAULT_G;
            let lhs = modpow(modpow(g, a, p).unwrap(), b, p).unwrap();
            let rhs = modpow(modpow(g, b, p).unwrap(), a, p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn keystream_prefix(s in any::<u64>(), n in 0usize..100, m in 0usize..100) {
            let long = keystream(SharedSecret(s), n + m);
            prop_assert_eq!(&long[..n], &keystream(SharedSecret(s), n)[..]);
        }
    }
}
