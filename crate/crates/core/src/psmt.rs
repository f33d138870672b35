// SPDX-License-Identifier: Apache-2.0

//! The single-round private set-membership test.
//!
//! The requester encrypts its Bloom index set as ℓ ciphertexts: a random
//! plaintext at each index of its item, the identity elsewhere. The responder
//! multiplies together every ciphertext outside its own index set and blinds
//! the product with a fresh exponent. The result decrypts to the identity
//! exactly when the requester's indices are covered by the responder's.

use std::fmt;

use rand::{CryptoRng, Rng};
use thiserror::Error;

use crate::bloom::{BloomError, BloomParams, IndexSet, DEFAULT_K};
use crate::group::{Ciphertext, Encryptor, Group, GroupError, KeyPair, PairPool, PublicKey, Scalar};
use crate::similarity::{slow_hash, HashCost, SimilarSet, SimilarityError};

#[derive(Debug, Error)]
pub enum PsmtError {
    #[error("invalid ciphertext")]
    InvalidCiphertext,
    #[error("query carries {got} ciphertexts, filter length is {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("n_target must be at least 1")]
    EmptyTarget,
    #[error("index {0} is outside the filter")]
    IndexOutOfRange(u32),
    #[error(transparent)]
    Bloom(#[from] BloomError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

impl From<GroupError> for PsmtError {
    fn from(_: GroupError) -> Self {
        PsmtError::InvalidCiphertext
    }
}

/// Message ③: `a, pk, ⟨h_i⟩, ⟨c_j⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryMessage {
    pub account_id: String,
    pub pk: PublicKey,
    pub bloom: BloomParams,
    pub ciphertexts: Vec<Ciphertext>,
}

/// Message ④.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResponseMessage {
    pub result: Ciphertext,
}

/// Requester state for one run. Holds the secret key; never serialized.
pub struct RequesterSession {
    keypair: KeyPair,
    bloom: BloomParams,
    index_set: IndexSet,
}

impl fmt::Debug for RequesterSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RequesterSession")
            .field("pk", &self.keypair.pk)
            .field("bloom", &self.bloom)
            .field("indices", &self.index_set.len())
            .finish_non_exhaustive()
    }
}

impl RequesterSession {
    pub fn public_key(&self) -> &PublicKey {
        &self.keypair.pk
    }

    pub fn bloom(&self) -> &BloomParams {
        &self.bloom
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    /// Decrypts a ciphertext under this session's key. Test and audit helper.
    pub fn decrypt(&self, c: &Ciphertext) -> Option<crate::group::GroupElement> {
        self.keypair.sk.decrypt(c)
    }
}

/// ν ∈ Z*_r, drawn fresh per response and dropped afterwards.
pub struct BlindingExponent(Scalar);

impl BlindingExponent {
    pub fn fresh<R: CryptoRng + ?Sized>(group: Group, rng: &mut R) -> Self {
        BlindingExponent(group.random_nonzero_scalar(rng))
    }

    pub fn value(&self) -> &Scalar {
        &self.0
    }
}

impl fmt::Debug for BlindingExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BlindingExponent(<redacted>)")
    }
}

/// A key pair generated ahead of a run together with its precomputed
/// encryptions of 1.
pub struct PreparedKey {
    keypair: KeyPair,
    pool: PairPool,
}

impl PreparedKey {
    /// Generates a key and fills `capacity` pairs synchronously.
    pub fn new<R: CryptoRng + ?Sized>(group: Group, capacity: usize, rng: &mut R) -> Self {
        let keypair = KeyPair::generate(group, rng);
        let pool = PairPool::new(keypair.pk, capacity);
        pool.fill(rng);
        PreparedKey { keypair, pool }
    }

    /// Generates a key and fills the pool from a background thread.
    pub fn with_producer<R: CryptoRng + ?Sized>(group: Group, capacity: usize, rng: &mut R) -> Self {
        let keypair = KeyPair::generate(group, rng);
        let pool = PairPool::with_producer(keypair.pk, capacity, rng.random());
        PreparedKey { keypair, pool }
    }

    pub fn pool(&self) -> &PairPool {
        &self.pool
    }
}

/// Requester-side settings shared by every run.
#[derive(Clone, Copy, Debug)]
pub struct QueryConfig {
    pub group: Group,
    pub k: u32,
    pub hash_cost: HashCost,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            group: Group::default(),
            k: DEFAULT_K,
            hash_cost: HashCost::default(),
        }
    }
}

/// The Bloom item for a password: its slow-hash digest under the account.
pub fn filter_item(account_id: &str, password: &str, cost: HashCost) -> Result<Vec<u8>, PsmtError> {
    Ok(slow_hash(account_id, password, cost)?.to_vec())
}

/// Builds message ③ for `password`, sized for `n_target` responder entries.
pub fn build_query<R: CryptoRng + ?Sized>(
    config: &QueryConfig,
    account_id: &str,
    password: &str,
    n_target: u32,
    prepared: Option<PreparedKey>,
    rng: &mut R,
) -> Result<(QueryMessage, RequesterSession), PsmtError> {
    if n_target == 0 {
        return Err(PsmtError::EmptyTarget);
    }
    let item = filter_item(account_id, password, config.hash_cost)?;
    let bloom = BloomParams::for_items(n_target, config.k, rng);
    let indices = bloom.indices(&item);
    build_query_for_indices(config.group, account_id, bloom, indices, prepared, rng)
}

/// Builds message ③ for an explicit requester index set `J_R`.
pub fn build_query_for_indices<R: CryptoRng + ?Sized>(
    group: Group,
    account_id: &str,
    bloom: BloomParams,
    indices: IndexSet,
    prepared: Option<PreparedKey>,
    rng: &mut R,
) -> Result<(QueryMessage, RequesterSession), PsmtError> {
    if let Some(j) = indices.max().filter(|&j| j >= bloom.length()) {
        return Err(PsmtError::IndexOutOfRange(j));
    }
    let (keypair, pool) = match prepared {
        Some(p) if p.keypair.pk.group == group => (p.keypair, Some(p.pool)),
        _ => (KeyPair::generate(group, rng), None),
    };
    let pk = keypair.pk;
    let encryptor = Encryptor::new(pk);
    let ciphertexts = (0..bloom.length())
        .map(|j| {
            let m = if indices.contains(j) {
                group.random_element(rng)
            } else {
                group.identity()
            };
            match pool.as_ref().and_then(|p| p.take()) {
                Some(pair) => pair.encrypt(&pk, &m),
                None => {
                    let x = group.random_scalar(rng);
                    encryptor.encrypt_with(&m, &x)
                }
            }
        })
        .collect();
    let query = QueryMessage {
        account_id: account_id.to_string(),
        pk,
        bloom: bloom.clone(),
        ciphertexts,
    };
    let session = RequesterSession {
        keypair,
        bloom,
        index_set: indices,
    };
    Ok((query, session))
}

/// `J_S`: union of index sets over `S` truncated to the filter's capacity.
pub fn responder_indices(bloom: &BloomParams, similar: &SimilarSet) -> IndexSet {
    let keep = (bloom.capacity() as usize).min(similar.entries.len());
    bloom.indices_of_all(similar.entries[..keep].iter())
}

/// Responder side: validates, then returns `(∏_{j∉J_S} c_j)^ν`.
pub fn respond<R: CryptoRng + ?Sized>(
    query: &QueryMessage,
    similar: &SimilarSet,
    rng: &mut R,
) -> Result<ResponseMessage, PsmtError> {
    check_query(query)?;
    let js = responder_indices(&query.bloom, similar);
    respond_checked(query, &js, rng)
}

/// [`respond`] with a precomputed `J_S`.
pub fn respond_with_index_set<R: CryptoRng + ?Sized>(
    query: &QueryMessage,
    js: &IndexSet,
    rng: &mut R,
) -> Result<ResponseMessage, PsmtError> {
    check_query(query)?;
    respond_checked(query, js, rng)
}

fn check_query(query: &QueryMessage) -> Result<(), PsmtError> {
    let expected = query.bloom.length() as usize;
    if query.ciphertexts.len() != expected {
        return Err(PsmtError::LengthMismatch {
            expected,
            got: query.ciphertexts.len(),
        });
    }
    if !query.pk.group.contains(&query.pk.key) {
        return Err(PsmtError::InvalidCiphertext);
    }
    if query.ciphertexts.iter().any(|c| !query.pk.validate(c)) {
        return Err(PsmtError::InvalidCiphertext);
    }
    Ok(())
}

fn respond_checked<R: CryptoRng + ?Sized>(
    query: &QueryMessage,
    js: &IndexSet,
    rng: &mut R,
) -> Result<ResponseMessage, PsmtError> {
    let pk = &query.pk;
    let outside = query
        .ciphertexts
        .iter()
        .enumerate()
        .filter(|(j, _)| !js.contains(*j as u32))
        .map(|(_, c)| c);
    let product = pk.product(outside, rng)?;
    let nu = BlindingExponent::fresh(pk.group, rng);
    let result = pk.hexp_fast(&product, nu.value(), rng)?;
    Ok(ResponseMessage { result })
}

/// Requester side: true iff `z` decrypts to the identity.
pub fn decode_result(session: &RequesterSession, response: &ResponseMessage) -> Result<bool, PsmtError> {
    let pk = &session.keypair.pk;
    if !pk.validate(&response.result) {
        return Err(PsmtError::InvalidCiphertext);
    }
    let m = session
        .keypair
        .sk
        .decrypt(&response.result)
        .ok_or(PsmtError::InvalidCiphertext)?;
    Ok(pk.group.is_identity(&m))
}

/// Plain Bloom membership: `indices(item) ⊆ ⋃ indices(s)` over `set`
/// truncated to capacity. Reference for equivalence checks.
pub fn membership_oracle<T: AsRef<[u8]>>(item: &[u8], set: &[T], bloom: &BloomParams) -> bool {
    let keep = (bloom.capacity() as usize).min(set.len());
    let js = bloom.indices_of_all(set[..keep].iter().map(|s| s.as_ref()));
    bloom.indices(item).is_subset(&js)
}

/// What a passive responder multiplies into its reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryStrategy {
    /// Reply with `c_j` for each `j` in the set (multiplied, rerandomized).
    Product(Vec<u32>),
    /// Reply with a fresh encryption of 1 and learn nothing.
    Blind,
}

/// Success rate of a responder-adversary in the index-recovery experiment.
///
/// Each trial draws `J_R` uniformly among `k`-subsets of `[ℓ]`, builds an
/// honest query, and lets the adversary choose the reply. The requester's
/// verdict (identity or not) is handed back, and the adversary guesses
/// uniformly among `k`-subsets consistent with that verdict.
pub fn index_recovery_rate<R: CryptoRng + ?Sized>(
    group: Group,
    ell: u32,
    k: u32,
    strategy: &AdversaryStrategy,
    trials: usize,
    rng: &mut R,
) -> f64 {
    assert!(ell >= k && k >= 1, "need ell >= k >= 1");
    let bloom = BloomParams::new(ell, k, Vec::new()).expect("ell >= k >= 1");
    let mut wins = 0usize;
    for _ in 0..trials {
        let jr = random_k_subset(ell, k, rng);
        let (query, session) =
            build_query_for_indices(group, "experiment", bloom.clone(), jr.clone(), None, rng)
                .expect("indices in range");
        let (reply, watched) = match strategy {
            AdversaryStrategy::Product(t) => {
                let cs = t.iter().map(|&j| &query.ciphertexts[j as usize]);
                (query.pk.product(cs, rng).expect("honest ciphertexts"), Some(t))
            }
            AdversaryStrategy::Blind => (query.pk.encrypt_identity(rng), None),
        };
        let verdict = decode_result(&session, &ResponseMessage { result: reply }).expect("valid reply");
        let guess = match watched {
            // identity verdict means no watched index was in J_R
            Some(t) => sample_consistent(ell, k, rng, |s| t.iter().any(|j| s.contains(*j)) != verdict),
            None => random_k_subset(ell, k, rng),
        };
        if guess == jr {
            wins += 1;
        }
    }
    wins as f64 / trials as f64
}

/// The generic adversary: reply with `c_0`, then guess a `k`-subset
/// containing 0 iff the verdict was "not the identity".
pub fn generic_bound_adversary<R: CryptoRng + ?Sized>(
    group: Group,
    ell: u32,
    k: u32,
    trials: usize,
    rng: &mut R,
) -> f64 {
    index_recovery_rate(group, ell, k, &AdversaryStrategy::Product(vec![0]), trials, rng)
}

/// `2 / C(ℓ, k)`, the best success any reply strategy achieves (capped at 1).
pub fn generic_bound(ell: u32, k: u32) -> f64 {
    (2.0 / binomial(ell as u64, k as u64)).min(1.0)
}

pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn random_k_subset<R: Rng + ?Sized>(ell: u32, k: u32, rng: &mut R) -> IndexSet {
    rand::seq::index::sample(rng, ell as usize, k as usize)
        .into_iter()
        .map(|j| j as u32)
        .collect()
}

fn sample_consistent<R: Rng + ?Sized>(
    ell: u32,
    k: u32,
    rng: &mut R,
    ok: impl Fn(&IndexSet) -> bool,
) -> IndexSet {
    // rejection sampling keeps the guess uniform over consistent subsets
    for _ in 0..100_000 {
        let s = random_k_subset(ell, k, rng);
        if ok(&s) {
            return s;
        }
    }
    random_k_subset(ell, k, rng)
}
