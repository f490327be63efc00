//! Rolling-hash fingerprints of binary patterns.
//!
//! phi(p) = sum over positions j (1-based) of bit_j * b^j mod q, with the
//! entry mapping -1 -> 0, +1 -> 1, q = 2^61 - 1 and b drawn from a seed.
//! Fingerprints compose: phi(S1 . S2) = phi(S1) + b^{|S1|} phi(S2), which
//! is what lets a balanced tree of span fingerprints absorb a one- or
//! two-position flip by rewriting a single root-to-leaf path.
//!
//! Fingerprint equality is treated as a hint, never as proof: callers must
//! verify pattern equality exactly on every dictionary hit.

use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternMode};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MODULUS: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprint {
    pub value: u64,
    pub len: usize,
}

#[inline]
fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

fn powmod(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, base, q);
        }
        base = mulmod(base, base, q);
        e >>= 1;
    }
    acc
}

/// Derive the hash base from a seed: uniform over [2, q-2].
pub fn base_from_seed(seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.random_range(2..=MODULUS - 2)
}

fn flat_fingerprint(bits: &[bool], base: u64, q: u64) -> u64 {
    let mut acc = 0u64;
    let mut pw = 1u64;
    for &bit in bits {
        pw = mulmod(pw, base, q);
        if bit {
            acc = addmod(acc, pw, q);
        }
    }
    acc
}

/// Fingerprint of a binary pattern under the base derived from `seed`.
pub fn fingerprint(p: &Pattern, seed: u64) -> Result<Fingerprint> {
    if p.mode() != PatternMode::Binary {
        return Err(Error::ModeMismatch("fingerprints are defined on binary patterns".into()));
    }
    let bits: Vec<bool> = (0..p.len()).map(|j| p.entry(j) == 1).collect();
    Ok(Fingerprint {
        value: flat_fingerprint(&bits, base_from_seed(seed), MODULUS),
        len: p.len(),
    })
}

/// Fingerprint of a concatenation from the fingerprints of its halves.
pub fn compose(left: Fingerprint, right: Fingerprint, base: u64, q: u64) -> Fingerprint {
    Fingerprint {
        value: addmod(left.value, mulmod(powmod(base, left.len as u64, q), right.value, q), q),
        len: left.len + right.len,
    }
}

/// Balanced fingerprint tree over the positions of one mutable binary
/// pattern. Each node stores the fingerprint of its span; flipping one
/// position rewrites the nodes on that root-to-leaf path only.
pub struct FingerprintTree {
    len: usize,
    base: u64,
    q: u64,
    /// fp[node] for the implicit recursive layout (root = 0).
    fp: Vec<u64>,
    /// b^{len(left child)} per internal node.
    shift: Vec<u64>,
    bits: Vec<bool>,
    last_path_nodes: usize,
}

impl FingerprintTree {
    pub fn new(bits: Vec<bool>, seed: u64) -> Self {
        Self::with_modulus(bits, base_from_seed(seed), MODULUS)
    }

    /// Construction with an explicit base and modulus. Tiny moduli make
    /// collisions reproducible, which the dedup tests rely on.
    pub fn with_modulus(bits: Vec<bool>, base: u64, q: u64) -> Self {
        let len = bits.len();
        assert!(len > 0);
        let size = 4 * len.next_power_of_two();
        let mut t = FingerprintTree {
            len,
            base,
            q,
            fp: vec![0; size],
            shift: vec![1; size],
            bits,
            last_path_nodes: 0,
        };
        t.build(0, 0, len);
        t
    }

    fn build(&mut self, node: usize, lo: usize, hi: usize) {
        if hi - lo == 1 {
            self.fp[node] = if self.bits[lo] {
                self.base % self.q
            } else {
                0
            };
            return;
        }
        let mid = (lo + hi) / 2;
        self.build(2 * node + 1, lo, mid);
        self.build(2 * node + 2, mid, hi);
        self.shift[node] = powmod(self.base, (mid - lo) as u64, self.q);
        self.fp[node] = addmod(
            self.fp[2 * node + 1],
            mulmod(self.shift[node], self.fp[2 * node + 2], self.q),
            self.q,
        );
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> u64 {
        self.fp[0]
    }

    pub fn bit(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// Nodes rewritten by the most recent flip.
    pub fn last_path_nodes(&self) -> usize {
        self.last_path_nodes
    }

    /// Toggle position j (0-based) and update the path above it.
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len);
        self.bits[j] = !self.bits[j];
        self.last_path_nodes = 0;
        self.flip_rec(0, 0, self.len, j);
    }

    fn flip_rec(&mut self, node: usize, lo: usize, hi: usize, j: usize) {
        self.last_path_nodes += 1;
        if hi - lo == 1 {
            self.fp[node] = if self.bits[j] { self.base % self.q } else { 0 };
            return;
        }
        let mid = (lo + hi) / 2;
        if j < mid {
            self.flip_rec(2 * node + 1, lo, mid, j);
        } else {
            self.flip_rec(2 * node + 2, mid, hi, j);
        }
        self.fp[node] = addmod(
            self.fp[2 * node + 1],
            mulmod(self.shift[node], self.fp[2 * node + 2], self.q),
            self.q,
        );
    }
}
