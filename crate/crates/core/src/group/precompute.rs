// SPDX-License-Identifier: Apache-2.0

//! Precomputed encryptions of the identity.
//!
//! A pair `(g^x, U^x)` is a ciphertext of 1. Encrypting `m` with it costs one
//! group operation on the body.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crossbeam::queue::ArrayQueue;
use rand::{CryptoRng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{Ciphertext, Encryptor, GroupElement, PublicKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecomputedPair {
    pub ephemeral: GroupElement,
    pub unit_body: GroupElement,
}

impl PrecomputedPair {
    pub fn new<R: CryptoRng + ?Sized>(pk: &PublicKey, rng: &mut R) -> Self {
        let c = pk.encrypt_identity(rng);
        PrecomputedPair {
            ephemeral: c.ephemeral,
            unit_body: c.body,
        }
    }

    pub fn as_ciphertext(&self) -> Ciphertext {
        Ciphertext {
            ephemeral: self.ephemeral,
            body: self.unit_body,
        }
    }

    /// Consumes the pair to encrypt `m`.
    pub fn encrypt(self, pk: &PublicKey, m: &GroupElement) -> Ciphertext {
        Ciphertext {
            ephemeral: self.ephemeral,
            body: pk.group.op(m, &self.unit_body),
        }
    }
}

/// Generates `count` pairs inline.
pub fn precompute_pairs<R: CryptoRng + ?Sized>(
    pk: &PublicKey,
    count: usize,
    rng: &mut R,
) -> Vec<PrecomputedPair> {
    let enc = Encryptor::new(*pk);
    (0..count)
        .map(|_| {
            let c = enc.encrypt_identity(rng);
            PrecomputedPair {
                ephemeral: c.ephemeral,
                unit_body: c.body,
            }
        })
        .collect()
}

/// Bounded pool of pairs for one public key, filled by a background thread.
///
/// Consumers call [`PairPool::take`], which never blocks.
pub struct PairPool {
    pk: PublicKey,
    queue: Arc<ArrayQueue<PrecomputedPair>>,
    stop: Arc<AtomicBool>,
    producer: Option<JoinHandle<()>>,
}

impl PairPool {
    /// Empty pool with no producer; fill it with [`PairPool::fill`].
    pub fn new(pk: PublicKey, capacity: usize) -> Self {
        PairPool {
            pk,
            queue: Arc::new(ArrayQueue::new(capacity.max(1))),
            stop: Arc::new(AtomicBool::new(false)),
            producer: None,
        }
    }

    /// Pool with a background producer that keeps it topped up.
    pub fn with_producer(pk: PublicKey, capacity: usize, seed: u64) -> Self {
        let mut pool = PairPool::new(pk, capacity);
        let queue = Arc::clone(&pool.queue);
        let stop = Arc::clone(&pool.stop);
        pool.producer = Some(std::thread::spawn(move || {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let enc = Encryptor::new(pk);
            while !stop.load(Ordering::Relaxed) {
                if queue.is_full() {
                    std::thread::sleep(Duration::from_millis(1));
                    continue;
                }
                let c = enc.encrypt_identity(&mut rng);
                let _ = queue.push(PrecomputedPair {
                    ephemeral: c.ephemeral,
                    unit_body: c.body,
                });
            }
        }));
        pool
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }

    /// Synchronously fills the pool to capacity.
    pub fn fill<R: CryptoRng + ?Sized>(&self, rng: &mut R) {
        while !self.queue.is_full() {
            if self.queue.push(PrecomputedPair::new(&self.pk, rng)).is_err() {
                break;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.queue.capacity()
    }

    pub fn take(&self) -> Option<PrecomputedPair> {
        self.queue.pop()
    }

    /// Encrypts `m` from a pooled pair, or inline when the pool is empty.
    pub fn encrypt<R: CryptoRng + ?Sized>(&self, m: &GroupElement, rng: &mut R) -> Ciphertext {
        match self.take() {
            Some(pair) => pair.encrypt(&self.pk, m),
            None => {
                let x = self.pk.group.random_scalar(rng);
                self.pk.encrypt_with(m, &x)
            }
        }
    }
}

impl Drop for PairPool {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.producer.take() {
            let _ = h.join();
        }
    }
}

impl std::fmt::Debug for PairPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PairPool")
            .field("group", &self.pk.group)
            .field("len", &self.len())
            .field("capacity", &self.capacity())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, KeyPair};

    #[test]
    fn pooled_encryption_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let kp = KeyPair::generate(Group::P192, &mut rng);
        let pool = PairPool::new(kp.pk, 4);
        pool.fill(&mut rng);
        assert_eq!(pool.len(), 4);
        for _ in 0..6 {
            let m = Group::P192.random_element(&mut rng);
            let c = pool.encrypt(&m, &mut rng);
            assert_eq!(kp.sk.decrypt(&c), Some(m));
        }
        assert!(pool.is_empty());
    }

    #[test]
    fn background_producer_fills_pool() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let kp = KeyPair::generate(Group::P160, &mut rng);
        let pool = PairPool::with_producer(kp.pk, 8, 1);
        for _ in 0..500 {
            if pool.len() == 8 {
                break;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        assert_eq!(pool.len(), 8);
        let pair = pool.take().unwrap();
        assert_eq!(kp.sk.decrypt(&pair.as_ciphertext()), Some(Group::P160.identity()));
    }
}
