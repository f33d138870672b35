// SPDX-License-Identifier: Apache-2.0

//! Bloom-filter index functions and sizing.
//!
//! No bit array is ever materialized here. The protocol only needs the index
//! set of each item, and the filter itself is encoded as ciphertexts.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake128;
use thiserror::Error;

/// Default number of hash functions.
pub const DEFAULT_K: u32 = 20;

/// Seed length used for fresh hash families.
pub const SEED_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BloomError {
    #[error("k must be at least 1")]
    ZeroHashes,
    #[error("filter length {length} is smaller than k = {k}")]
    TooShort { length: u32, k: u32 },
    #[error("seed longer than 65535 bytes")]
    SeedTooLong,
}

/// `(ℓ, k, seed)`. The seed fixes `h_0..h_{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BloomParams {
    length: u32,
    k: u32,
    seed: Vec<u8>,
}

impl BloomParams {
    pub fn new(length: u32, k: u32, seed: Vec<u8>) -> Result<Self, BloomError> {
        if k == 0 {
            return Err(BloomError::ZeroHashes);
        }
        if length < k {
            return Err(BloomError::TooShort { length, k });
        }
        if seed.len() > u16::MAX as usize {
            return Err(BloomError::SeedTooLong);
        }
        Ok(BloomParams { length, k, seed })
    }

    /// Parameters sized for `n` items with `k` hashes and a random seed.
    pub fn for_items<R: rand::Rng + ?Sized>(n: u32, k: u32, rng: &mut R) -> Self {
        let mut seed = vec![0u8; SEED_LEN];
        rng.fill_bytes(&mut seed);
        let length = length_for(n.max(1), k).max(k as u64);
        BloomParams::new(length as u32, k, seed).expect("sized parameters are valid")
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    /// Number of items the filter holds at the design false-positive rate.
    pub fn capacity(&self) -> u64 {
        capacity(self.length as u64, self.k)
    }

    /// `h_i(item)`: SHAKE128 over `len(seed) ‖ seed ‖ i ‖ item`, first eight
    /// output bytes as a big-endian integer, reduced mod ℓ.
    pub fn hash(&self, i: u32, item: &[u8]) -> u32 {
        let mut h = Shake128::default();
        h.update(&(self.seed.len() as u16).to_be_bytes());
        h.update(&self.seed);
        h.update(&i.to_be_bytes());
        h.update(item);
        let mut out = [0u8; 8];
        h.finalize_xof().read(&mut out);
        (u64::from_be_bytes(out) % self.length as u64) as u32
    }

    /// `⋃_i {h_i(item)}`.
    pub fn indices(&self, item: &[u8]) -> IndexSet {
        IndexSet((0..self.k).map(|i| self.hash(i, item)).collect())
    }

    /// Union of the index sets of every item.
    pub fn indices_of_all<I, T>(&self, items: I) -> IndexSet
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        let mut set = IndexSet::default();
        for item in items {
            set.extend(&self.indices(item.as_ref()));
        }
        set
    }
}

/// A set of filter positions in `[0, ℓ)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(BTreeSet<u32>);

impl IndexSet {
    pub fn contains(&self, j: u32) -> bool {
        self.0.contains(&j)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn extend(&mut self, other: &IndexSet) {
        self.0.extend(other.0.iter().copied());
    }

    pub fn insert(&mut self, j: u32) -> bool {
        self.0.insert(j)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        IndexSet(iter.into_iter().collect())
    }
}

/// `max(1, round((ℓ/n) ln 2))`, rounding halves up.
pub fn optimal_k(ell: u64, n: u64) -> u32 {
    assert!(ell >= 1 && n >= 1, "ell and n must be positive");
    let k = (ell as f64 / n as f64 * LN_2 + 0.5).floor();
    k.max(1.0) as u32
}

/// `⌈k n / ln 2⌉`.
pub fn length_for(n: u32, k: u32) -> u64 {
    (k as f64 * n as f64 / LN_2).ceil() as u64
}

/// `(1 - e^{-kn/ℓ})^k`.
pub fn fpr_estimate(ell: u64, k: u32, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let fill = 1.0 - (-(k as f64) * n as f64 / ell as f64).exp();
    fill.powi(k as i32)
}

/// `⌊ℓ ln 2 / k⌋`.
pub fn capacity(ell: u64, k: u32) -> u64 {
    (ell as f64 * LN_2 / k as f64).floor() as u64
}
