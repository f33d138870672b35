// SPDX-License-Identifier: Apache-2.0

//! Similar-password sets: rule-based variants of the real password and of
//! `d` honey passwords, stored only as slow-hash digests.

use std::collections::HashSet;
use std::io::{self, Read, Write};
use std::path::Path;

use argon2::{Algorithm, Argon2, Params, Version};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

pub const DIGEST_LEN: usize = 32;

pub type Digest = [u8; DIGEST_LEN];

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("capacity {capacity} cannot hold {seeds} seed passwords")]
    CapacityTooSmall { capacity: usize, seeds: usize },
    #[error("hash parameters rejected: {0}")]
    HashParams(String),
    #[error("malformed similar-set record: {0}")]
    Format(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Cost of the memory-hard hash H (Argon2id).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashCost {
    pub memory_kib: u32,
    pub iterations: u32,
    pub lanes: u32,
}

impl Default for HashCost {
    /// 64 MiB, three passes, one lane.
    fn default() -> Self {
        HashCost {
            memory_kib: 64 * 1024,
            iterations: 3,
            lanes: 1,
        }
    }
}

impl HashCost {
    /// Minimal cost, for tests and simulations only.
    pub fn insecure_fast() -> Self {
        HashCost {
            memory_kib: 8,
            iterations: 1,
            lanes: 1,
        }
    }
}

/// `H(a, π)`: Argon2id keyed by the canonical account id as salt.
pub fn slow_hash(account_id: &str, password: &str, cost: HashCost) -> Result<Digest, SimilarityError> {
    let params = Params::new(cost.memory_kib, cost.iterations, cost.lanes, Some(DIGEST_LEN))
        .map_err(|e| SimilarityError::HashParams(e.to_string()))?;
    let argon = Argon2::new(Algorithm::Argon2id, Version::V0x13, params);
    // Argon2 wants at least eight bytes of salt.
    let salt = format!("pwreuse:{account_id}");
    let mut out = [0u8; DIGEST_LEN];
    argon
        .hash_password_into(password.as_bytes(), salt.as_bytes(), &mut out)
        .map_err(|e| SimilarityError::HashParams(e.to_string()))?;
    Ok(out)
}

/// A named password transform. Rules must be deterministic.
#[derive(Clone, Copy)]
pub struct TransformRule {
    pub name: &'static str,
    pub apply: fn(&str) -> Vec<String>,
}

impl std::fmt::Debug for TransformRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformRule").field("name", &self.name).finish()
    }
}

const SUFFIXES: [&str; 3] = ["1", "!", "123"];
const YEARS: [&str; 4] = ["2023", "2024", "2025", "2026"];

fn capitalize_first(pw: &str) -> Vec<String> {
    let mut chars = pw.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => vec![c.to_uppercase().chain(chars).collect()],
        Some(c) if c.is_uppercase() => vec![c.to_lowercase().chain(chars).collect()],
        _ => vec![],
    }
}

fn bump_trailing_digit(pw: &str, up: bool) -> Vec<String> {
    let Some(last) = pw.chars().last() else {
        return vec![];
    };
    let Some(d) = last.to_digit(10) else {
        return vec![];
    };
    let next = if up { (d + 1) % 10 } else { (d + 9) % 10 };
    let mut s: String = pw.chars().take(pw.chars().count() - 1).collect();
    s.push(char::from_digit(next, 10).unwrap());
    vec![s]
}

fn increment_digit(pw: &str) -> Vec<String> {
    bump_trailing_digit(pw, true)
}

fn decrement_digit(pw: &str) -> Vec<String> {
    bump_trailing_digit(pw, false)
}

fn all_caps(pw: &str) -> Vec<String> {
    let up = pw.to_uppercase();
    if up == pw {
        vec![pw.to_lowercase()]
    } else {
        vec![up]
    }
}

fn append_suffix(pw: &str) -> Vec<String> {
    SUFFIXES
        .iter()
        .chain(YEARS.iter())
        .map(|s| format!("{pw}{s}"))
        .collect()
}

fn remove_suffix(pw: &str) -> Vec<String> {
    let trimmed = pw.trim_end_matches(|c: char| c.is_ascii_digit() || "!?.".contains(c));
    if trimmed.len() != pw.len() && !trimmed.is_empty() {
        vec![trimmed.to_string()]
    } else {
        vec![]
    }
}

const LEET: [(char, char); 6] = [('a', '@'), ('e', '3'), ('i', '1'), ('o', '0'), ('s', '$'), ('t', '7')];

fn leet(pw: &str) -> Vec<String> {
    let forward: String = pw
        .chars()
        .map(|c| {
            LEET.iter()
                .find(|(p, _)| *p == c.to_ascii_lowercase())
                .map(|(_, l)| *l)
                .unwrap_or(c)
        })
        .collect();
    let back: String = pw
        .chars()
        .map(|c| LEET.iter().find(|(_, l)| *l == c).map(|(p, _)| *p).unwrap_or(c))
        .collect();
    [forward, back].into_iter().filter(|s| s != pw).collect()
}

const SHIFTED: [(char, char); 10] = [
    ('1', '!'),
    ('2', '@'),
    ('3', '#'),
    ('4', '$'),
    ('5', '%'),
    ('6', '^'),
    ('7', '&'),
    ('8', '*'),
    ('9', '('),
    ('0', ')'),
];

const QWERTY_ROWS: [&str; 4] = ["1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm"];

fn keyboard_shift(pw: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(last) = pw.chars().last() {
        let swapped = SHIFTED
            .iter()
            .find_map(|&(a, b)| (a == last).then_some(b).or((b == last).then_some(a)));
        if let Some(s) = swapped {
            let mut v: String = pw.chars().take(pw.chars().count() - 1).collect();
            v.push(s);
            out.push(v);
        }
    }
    let right: Option<String> = pw
        .chars()
        .map(|c| {
            let lc = c.to_ascii_lowercase();
            QWERTY_ROWS.iter().find_map(|row| {
                let i = row.find(lc)?;
                let n = row.as_bytes().get(i + 1).copied()? as char;
                Some(if c.is_ascii_uppercase() { n.to_ascii_uppercase() } else { n })
            })
        })
        .collect();
    out.extend(right);
    out
}

fn truncate(pw: &str) -> Vec<String> {
    let n = pw.chars().count();
    if n > 1 {
        vec![pw.chars().take(n - 1).collect()]
    } else {
        vec![]
    }
}

/// The shipped cascade, most common transforms first.
pub const DEFAULT_RULES: [TransformRule; 9] = [
    TransformRule { name: "capitalize", apply: capitalize_first },
    TransformRule { name: "digit+1", apply: increment_digit },
    TransformRule { name: "digit-1", apply: decrement_digit },
    TransformRule { name: "all-caps", apply: all_caps },
    TransformRule { name: "append-suffix", apply: append_suffix },
    TransformRule { name: "remove-suffix", apply: remove_suffix },
    TransformRule { name: "leet", apply: leet },
    TransformRule { name: "keyboard-shift", apply: keyboard_shift },
    TransformRule { name: "truncate", apply: truncate },
];

/// Variants of `password` in cascade order, starting with the password itself.
pub fn generate_similar(password: &str, budget: usize) -> Vec<String> {
    generate_similar_with(password, budget, &DEFAULT_RULES)
}

/// Breadth-first expansion: every rule on the password, then every rule on
/// each first-level variant, and so on until `budget` distinct strings exist.
pub fn generate_similar_with(password: &str, budget: usize, rules: &[TransformRule]) -> Vec<String> {
    let mut out = vec![password.to_string()];
    let mut seen: HashSet<String> = out.iter().cloned().collect();
    let mut frontier = 0;
    while out.len() < budget && frontier < out.len() {
        let base = out[frontier].clone();
        frontier += 1;
        for rule in rules {
            for v in (rule.apply)(&base) {
                if out.len() >= budget {
                    return out;
                }
                if !v.is_empty() && seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        }
    }
    out.truncate(budget);
    out
}

/// Common password base words with rough relative frequencies.
const VOCABULARY: &[(&str, u32)] = &[
    ("love", 90), ("baby", 40), ("angel", 45), ("star", 30), ("blue", 30),
    ("bear", 25), ("king", 28), ("cool", 20), ("life", 18), ("jack", 16),
    ("lucky", 22), ("happy", 24), ("sunny", 18), ("tiger", 30), ("money", 35),
    ("magic", 20), ("dance", 14), ("music", 22), ("pepper", 20), ("cookie", 18),
    ("summer", 30), ("dragon", 45), ("monkey", 50), ("soccer", 28), ("hockey", 18),
    ("banana", 16), ("orange", 14), ("purple", 18), ("silver", 16), ("flower", 24),
    ("hunter", 26), ("ranger", 14), ("buster", 16), ("tigger", 18), ("shadow", 30),
    ("master", 32), ("killer", 18), ("secret", 22), ("jordan", 26), ("thomas", 18),
    ("charlie", 24), ("freedom", 16), ("welcome", 24), ("rainbow", 20), ("sunshine", 34),
    ("princess", 40), ("football", 38), ("baseball", 26), ("starwars", 18), ("michelle", 18),
    ("computer", 16), ("whatever", 14), ("superman", 22), ("chocolate", 18), ("butterfly", 20),
    ("basketball", 14), ("strawberry", 10), ("friendship", 8), ("motherland", 4), ("everything", 6),
];

const DIGIT_PATTERNS: &[(&str, u32)] = &[
    ("1", 50), ("2", 10), ("7", 8), ("12", 12), ("22", 6), ("69", 6), ("99", 8), ("11", 8),
    ("123", 30), ("007", 4), ("777", 4), ("1234", 14), ("2000", 4), ("1990", 4), ("2010", 4),
];

const SYMBOLS: &[(char, u32)] = &[('!', 50), ('@', 12), ('#', 8), ('$', 8), ('*', 8), ('.', 6), ('_', 6), ('?', 4)];

fn weighted<'a, T, R: Rng + ?Sized>(items: &'a [(T, u32)], rng: &mut R) -> &'a T {
    let total: u32 = items.iter().map(|(_, w)| w).sum();
    let mut pick = rng.random_range(0..total);
    for (item, w) in items {
        if pick < *w {
            return item;
        }
        pick -= w;
    }
    &items[items.len() - 1].0
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Letter,
    Digit,
    Symbol,
}

fn class_of(c: char) -> Class {
    if c.is_alphabetic() {
        Class::Letter
    } else if c.is_ascii_digit() {
        Class::Digit
    } else {
        Class::Symbol
    }
}

/// Splits a password into maximal runs of letters, digits and symbols.
fn segments(pw: &str) -> Vec<(Class, String)> {
    let mut out: Vec<(Class, String)> = Vec::new();
    for c in pw.chars() {
        let class = class_of(c);
        match out.last_mut() {
            Some((k, s)) if *k == class => s.push(c),
            _ => out.push((class, c.to_string())),
        }
    }
    out
}

fn letters_like<R: Rng + ?Sized>(template: &str, rng: &mut R) -> String {
    let len = template.chars().count();
    let exact: Vec<(&str, u32)> = VOCABULARY
        .iter()
        .copied()
        .filter(|(w, _)| w.len() == len)
        .collect();
    let mut word = if exact.is_empty() {
        let mut s = String::new();
        while s.len() < len {
            s.push_str(weighted(VOCABULARY, rng));
        }
        s.chars().take(len).collect()
    } else {
        weighted(&exact, rng).to_string()
    };
    // carry over the capitalization shape of the template
    let upper_all = template.chars().all(|c| c.is_uppercase());
    let upper_first = template.chars().next().is_some_and(|c| c.is_uppercase());
    if upper_all && len > 1 {
        word = word.to_uppercase();
    } else if upper_first {
        word = capitalize_first(&word).pop().unwrap_or(word);
    }
    word
}

fn digits_like<R: Rng + ?Sized>(template: &str, rng: &mut R) -> String {
    let len = template.len();
    let exact: Vec<(&str, u32)> = DIGIT_PATTERNS
        .iter()
        .copied()
        .filter(|(d, _)| d.len() == len)
        .collect();
    if !exact.is_empty() && rng.random_bool(0.7) {
        return weighted(&exact, rng).to_string();
    }
    (0..len)
        .map(|_| char::from_digit(rng.random_range(0..10), 10).unwrap())
        .collect()
}

fn symbols_like<R: Rng + ?Sized>(template: &str, rng: &mut R) -> String {
    (0..template.chars().count()).map(|_| *weighted(SYMBOLS, rng)).collect()
}

fn honey_candidate<R: Rng + ?Sized>(password: &str, rng: &mut R) -> String {
    segments(password)
        .iter()
        .map(|(class, s)| match class {
            Class::Letter => letters_like(s, rng),
            Class::Digit => digits_like(s, rng),
            Class::Symbol => symbols_like(s, rng),
        })
        .collect()
}

/// `d` honey passwords with the letter/digit/symbol shape of `password`,
/// drawn from a frequency-weighted vocabulary. All distinct from `password`
/// and from each other.
pub fn generate_honey(password: &str, d: usize, rng_seed: u64) -> Vec<String> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let mut out: Vec<String> = Vec::with_capacity(d);
    let mut attempts = 0usize;
    while out.len() < d {
        attempts += 1;
        let mut cand = honey_candidate(password, &mut rng);
        if attempts > 64 * (d + 1) {
            // shape too constrained for the vocabulary; perturb a random position
            let mut chars: Vec<char> = cand.chars().collect();
            if chars.is_empty() {
                chars.push('a');
            }
            let i = rng.random_range(0..chars.len());
            chars[i] = match class_of(chars[i]) {
                Class::Digit => char::from_digit(rng.random_range(0..10), 10).unwrap(),
                Class::Symbol => *weighted(SYMBOLS, &mut rng),
                Class::Letter => (b'a' + rng.random_range(0..26u8)) as char,
            };
            cand = chars.into_iter().collect();
        }
        if cand != password && !out.contains(&cand) {
            out.push(cand);
        }
    }
    out
}

/// One pre-hash entry of a similar set, with the seed it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub text: String,
    /// Index into the shuffled seed list.
    pub seed_slot: usize,
    /// True when derived from the real password.
    pub from_real: bool,
}

/// Seeds (real password plus honeywords), each expanded to
/// `capacity / (d+1)` variants and interleaved round-robin in shuffled seed
/// order, so any prefix covers every seed about equally.
pub fn similar_candidates(
    password: &str,
    d: usize,
    capacity: usize,
    rng_seed: u64,
) -> Result<Vec<Candidate>, SimilarityError> {
    let seeds = d + 1;
    if capacity < seeds {
        return Err(SimilarityError::CapacityTooSmall { capacity, seeds });
    }
    let per_seed = capacity / seeds;
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let honey = generate_honey(password, d, rng.random());
    let mut seed_list: Vec<(String, bool)> = std::iter::once((password.to_string(), true))
        .chain(honey.into_iter().map(|h| (h, false)))
        .collect();
    seed_list.shuffle(&mut rng);
    let expanded: Vec<Vec<String>> = seed_list
        .iter()
        .map(|(s, _)| generate_similar(s, per_seed))
        .collect();
    let mut out = Vec::with_capacity(per_seed * seeds);
    let mut seen = HashSet::new();
    for round in 0..per_seed {
        for (slot, variants) in expanded.iter().enumerate() {
            if let Some(v) = variants.get(round) {
                if seen.insert(v.clone()) {
                    out.push(Candidate {
                        text: v.clone(),
                        seed_slot: slot,
                        from_real: seed_list[slot].1,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The hashed similar-password set `S_a` held by a responder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarSet {
    pub account_id: String,
    pub d: u32,
    pub per_seed_budget: u32,
    pub capacity: u32,
    /// Digests in priority order; a responder truncating to a prefix keeps
    /// honeyword cover.
    pub entries: Vec<Digest>,
}

impl SimilarSet {
    pub fn empty(account_id: &str) -> Self {
        SimilarSet {
            account_id: account_id.to_string(),
            d: 0,
            per_seed_budget: 0,
            capacity: 0,
            entries: Vec::new(),
        }
    }

    pub fn contains(&self, digest: &Digest) -> bool {
        self.entries.contains(digest)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    const MAGIC: &'static [u8; 4] = b"SSET";
    const VERSION: u8 = 1;

    /// `SSET ‖ version ‖ u16 id len ‖ id ‖ u32 d ‖ u32 per-seed ‖ u32 capacity ‖
    /// u32 count ‖ count × 32-byte digests`, integers big-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&[Self::VERSION])?;
        let id = self.account_id.as_bytes();
        let id_len = u16::try_from(id.len())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "account id too long"))?;
        w.write_all(&id_len.to_be_bytes())?;
        w.write_all(id)?;
        for v in [self.d, self.per_seed_budget, self.capacity, self.entries.len() as u32] {
            w.write_all(&v.to_be_bytes())?;
        }
        for e in &self.entries {
            w.write_all(e)?;
        }
        Ok(())
    }

    /// Reads one record; `Ok(None)` at a clean end of input.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Option<Self>, SimilarityError> {
        let mut magic = [0u8; 4];
        match r.read_exact(&mut magic) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
            Err(e) => return Err(e.into()),
        }
        if &magic != Self::MAGIC {
            return Err(SimilarityError::Format("bad magic"));
        }
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1)?;
        if b1[0] != Self::VERSION {
            return Err(SimilarityError::Format("unsupported version"));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let mut id = vec![0u8; u16::from_be_bytes(b2) as usize];
        r.read_exact(&mut id)?;
        let account_id = String::from_utf8(id).map_err(|_| SimilarityError::Format("account id not UTF-8"))?;
        let mut read_u32 = || -> io::Result<u32> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_be_bytes(b))
        };
        let d = read_u32()?;
        let per_seed_budget = read_u32()?;
        let capacity = read_u32()?;
        let count = read_u32()? as usize;
        let mut entries = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let mut e = [0u8; DIGEST_LEN];
            r.read_exact(&mut e)?;
            entries.push(e);
        }
        Ok(Some(SimilarSet {
            account_id,
            d,
            per_seed_budget,
            capacity,
            entries,
        }))
    }
}

/// Builds `S_a` for `(account_id, password)` with `d` honeywords.
pub fn build_similar_set(
    account_id: &str,
    password: &str,
    d: usize,
    capacity: usize,
    hash_cost: HashCost,
    rng_seed: u64,
) -> Result<SimilarSet, SimilarityError> {
    let candidates = similar_candidates(password, d, capacity, rng_seed)?;
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let digest = slow_hash(account_id, &c.text, hash_cost)?;
        if seen.insert(digest) {
            entries.push(digest);
        }
    }
    Ok(SimilarSet {
        account_id: account_id.to_string(),
        d: d as u32,
        per_seed_budget: (capacity / (d + 1)) as u32,
        capacity: capacity as u32,
        entries,
    })
}

/// All similar sets held by one responder, keyed by account.
#[derive(Clone, Debug, Default)]
pub struct SimilarStore {
    sets: std::collections::HashMap<String, SimilarSet>,
}

impl SimilarStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces any existing set for the same account (password change).
    pub fn insert(&mut self, set: SimilarSet) {
        self.sets.insert(set.account_id.clone(), set);
    }

    pub fn remove(&mut self, account_id: &str) -> Option<SimilarSet> {
        self.sets.remove(account_id)
    }

    pub fn get(&self, account_id: &str) -> Option<&SimilarSet> {
        self.sets.get(account_id)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SimilarSet> {
        self.sets.values()
    }

    /// Concatenated records, sorted by account id.
    pub fn save(&self, path: &Path) -> Result<(), SimilarityError> {
        let mut ids: Vec<&String> = self.sets.keys().collect();
        ids.sort();
        let mut w = io::BufWriter::new(std::fs::File::create(path)?);
        for id in ids {
            self.sets[id].write_to(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimilarityError> {
        let mut r = io::BufReader::new(std::fs::File::open(path)?);
        let mut store = SimilarStore::new();
        while let Some(set) = SimilarSet::read_from(&mut r)? {
            store.insert(set);
        }
        Ok(store)
    }
}
